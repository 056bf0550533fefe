import init, { template, evaluate, sweep } from "./pkg/slb_wasm.js";

const SWEEP_RANGES = {
  S: ["sale_price", 6.5e6, 13.5e6],
  monthly_rent: ["monthly_rent", 2e4, 1.5e5],
  R_ts: ["tax_rate_seller_lessee", 0, 0.6],
  P_dss: ["p_bankrupt_slb", 0, 1],
};
const money = new Intl.NumberFormat("en-US", { maximumFractionDigits: 0 });
const form = document.getElementById("controls");
let base;

function fmt(field, x) {
  if (field === "sale_price" || field === "monthly_rent") return money.format(x);
  return Number(x).toFixed(3);
}

function current() {
  const s = structuredClone(base);
  for (const input of form.querySelectorAll("input[type=range]")) {
    s.deal[input.name] = Number(input.value);
    document.getElementById("v-" + input.name).textContent = fmt(input.name, input.value);
  }
  return JSON.stringify(s);
}

function showEvaluation(text) {
  const r = JSON.parse(evaluate(text));
  document.getElementById("n_sl").textContent = money.format(r.n_sl);
  document.getElementById("n_b").textContent = money.format(r.n_b);
  document.getElementById("recommendation").textContent = r.recommendation;
  const badges = document.getElementById("badges");
  badges.replaceChildren(...r.conditions.map((c) => {
    const b = document.createElement("span");
    b.className = "badge " + (c.holds ? "holds" : "fails");
    b.textContent = c.id;
    b.title = `margin ${c.margin.toPrecision(6)}` + (c.note ? `\n${c.note}` : "");
    return b;
  }));
}

function showSweep(text) {
  const [, from, to] = SWEEP_RANGES[form.sweep_var.value];
  const t = JSON.parse(sweep(text, form.sweep_var.value, from, to, 201));
  const canvas = document.getElementById("chart");
  const ctx = canvas.getContext("2d");
  const pad = 60;
  const ys = [...t.n_sl, ...t.n_b].filter((y) => y !== null);
  const lo = Math.min(...ys), hi = Math.max(...ys);
  const px = (x) => pad + (x - from) / (to - from) * (canvas.width - 2 * pad);
  const py = (y) => canvas.height - pad - (y - lo) / (hi - lo || 1) * (canvas.height - 2 * pad);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "22px system-ui";
  ctx.fillStyle = "#5b6472";
  ctx.fillText(money.format(hi), 4, pad - 8);
  ctx.fillText(money.format(lo), 4, canvas.height - pad + 28);
  for (const [series, color] of [[t.n_sl, "#2563eb"], [t.n_b, "#d97706"]]) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 4;
    ctx.beginPath();
    let open = false;
    series.forEach((y, i) => {
      if (y === null) { open = false; return; }
      open ? ctx.lineTo(px(t.xs[i]), py(y)) : ctx.moveTo(px(t.xs[i]), py(y));
      open = true;
    });
    ctx.stroke();
  }
  if (t.breakeven !== null) {
    ctx.strokeStyle = "#111";
    ctx.setLineDash([10, 8]);
    ctx.beginPath();
    ctx.moveTo(px(t.breakeven), pad / 2);
    ctx.lineTo(px(t.breakeven), canvas.height - pad);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#111";
    ctx.fillText(`breakeven ${fmt(SWEEP_RANGES[form.sweep_var.value][0], t.breakeven)}`, px(t.breakeven) + 8, pad / 2 + 16);
  }
}

function refresh() {
  const error = document.getElementById("error");
  try {
    const text = current();
    showEvaluation(text);
    showSweep(text);
    error.textContent = "";
  } catch (e) {
    error.textContent = e.message ?? String(e);
  }
}

function reset() {
  for (const input of form.querySelectorAll("input[type=range]")) input.value = base.deal[input.name];
  refresh();
}

await init();
base = JSON.parse(template());
form.addEventListener("input", refresh);
document.getElementById("reset").addEventListener("click", reset);
reset();
