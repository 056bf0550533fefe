"""Independent substitution oracle for the DESK-1 golden values.

Computes the present values with literal month-by-month loops, substitutes
them into the two net-position formulas term by term, evaluates the
non-derivative conditions, and ranks the one-at-a-time tornado. Writes
fixtures/golden/desk1.golden.json and fixtures/golden/batch_header.csv.

Run: python3 tools/oracle.py
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent


def level_payment(principal, r, n):
    """Payment driving a literal month loop's terminal balance to zero."""

    def terminal(pmt):
        b = principal
        for _ in range(n):
            b = b + b * r - pmt
        return b

    lo, hi = 0.0, principal * (1 + r) ** n + 1
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if terminal(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def present_values(deal):
    term = deal["term_months"]
    disc = deal.get("discount_rate", deal["borrow_cost_after"]) / 12.0
    basis = deal.get("depreciation_basis", deal["sale_price"])
    life = deal.get("depreciation_life_months", term)

    l_s = 0.0
    for k in range(1, term + 1):
        l_s += deal["monthly_rent"] / (1 + disc) ** k

    r = deal["firm_borrow_cost"] / 12.0
    pmt = level_payment(deal["loan_principal"], r, term)
    balance = deal["loan_principal"]
    i_pv = 0.0
    for k in range(1, term + 1):
        interest = balance * r
        i_pv += interest / (1 + disc) ** k
        balance = balance + interest - pmt

    d_pv = 0.0
    for k in range(1, min(life, term) + 1):
        d_pv += (basis / life) / (1 + disc) ** k

    return l_s, i_pv, d_pv, deal["terminal_value_pv"]


def net_positions(deal):
    l_s, i_pv, d_pv, tv = present_values(deal)
    S, R_sl, R_ts, P_t = deal["sale_price"], deal["txn_cost_slb"], deal["tax_rate_seller_lessee"], deal["p_taxable_income"]
    R_a, P_dss = deal["leverage_benefit"], deal["p_bankrupt_slb"]
    P, R_ltc, R_dlev = deal["loan_principal"], deal["txn_cost_loan"], deal["leverage_penalty_rate"]
    DC, TC, P_dsb = deal["debt_to_capital"], deal["total_capital"], deal["p_bankrupt_borrow"]
    if deal["classification"] == "capital":
        n_sl = S * (1 - R_sl) + ((l_s * R_ts) + (d_pv * R_ts * P_t) - l_s + R_a + tv) * (1 - P_dss)
    else:
        n_sl = S * (1 - R_sl) + ((l_s * R_ts) - l_s + R_a) * (1 - P_dss)
    n_b = P * (1 - R_ltc) + ((i_pv * R_ts) - (R_dlev * DC * TC) + (R_ts * R_dlev * DC * TC) - i_pv * (1 - R_ts)) * (1 - P_dsb)
    return n_sl, n_b, (l_s, i_pv, d_pv, tv)


def curve_value_at_knot(curve, x):
    idx = curve["xs"].index(x)
    return curve["ys"][idx]


def conditions(scenario):
    deal = scenario["deal"]
    n_sl, n_b, (l_s, i_pv, d_pv, tv) = net_positions(deal)
    if deal["classification"] == "operating":
        d_pv, tv = 0.0, 0.0
    g = lambda k: deal[k]
    r_a = curve_value_at_knot(scenario["curves"]["r_a_of_DC"], g("debt_to_capital"))
    out = {}
    lhs = max(g("firm_borrow_cost") * (1 - g("tax_rate_seller_lessee")) + g("txn_cost_loan") * g("loan_principal")
              + g("leverage_penalty_rate") * g("debt_to_capital") * g("total_capital"), 0.0)
    rhs = g("implicit_lease_rate") * (1 - g("tax_rate_seller_lessee")) - d_pv * g("tax_rate_seller_lessee") + g("txn_cost_slb") * g("sale_price")
    out["B1"] = {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs}
    out["B2"] = {"lhs": n_b, "rhs": n_sl, "margin": n_b - n_sl}
    lhs = max((g("borrow_cost_after") - g("borrow_cost_before")) - g("txn_cost_slb"), 0.0)
    rhs = g("txn_cost_loan") + g("leverage_penalty_rate")
    out["B3"] = {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs}
    out["B6"] = {"lhs": n_b, "rhs": max(n_sl, 0.0), "margin": n_b - max(n_sl, 0.0)}
    s1 = (g("sale_price") - l_s - g("txn_cost_slb") * g("sale_price") - l_s * g("tax_rate_seller_lessee")
          - r_a * g("debt_to_capital") * g("total_capital") + tv * (1 - g("p_bankrupt_slb")))
    out["S1"] = {"lhs": s1, "rhs": 0.0, "margin": s1}
    lhs = g("implicit_lease_rate") * g("tax_rate_seller_lessee")
    rhs = g("borrow_cost_before") * g("tax_rate_seller_lessee")
    out["S4"] = {"lhs": lhs, "rhs": rhs, "margin": rhs - lhs}
    for v in out.values():
        v["holds"] = v["margin"] > 0
    return out


# (symbol, field, kind) in the tool's fixed parameter order.
PARAMETERS = [
    ("S", "sale_price", "money"),
    ("P", "loan_principal", "money"),
    ("monthly_rent", "monthly_rent", "money"),
    ("term_months", "term_months", "count"),
    ("R_s", "implicit_lease_rate", "rate"),
    ("R_bb", "borrow_cost_before", "rate"),
    ("R_ba", "borrow_cost_after", "rate"),
    ("R_f", "firm_borrow_cost", "rate"),
    ("R_ts", "tax_rate_seller_lessee", "rate"),
    ("R_tb", "tax_rate_buyer_lessor", "rate"),
    ("R_sl", "txn_cost_slb", "rate"),
    ("R_ltc", "txn_cost_loan", "rate"),
    ("R_a", "leverage_benefit", "money"),
    ("R_dlev", "leverage_penalty_rate", "rate"),
    ("DC", "debt_to_capital", "rate"),
    ("TC", "total_capital", "money"),
    ("TV", "terminal_value_pv", "money"),
    ("P_dss", "p_bankrupt_slb", "prob"),
    ("P_dsb", "p_bankrupt_borrow", "prob"),
    ("P_dls", "p_lessor_bankrupt_slb", "prob"),
    ("P_dlb", "p_lessor_bankrupt_borrow", "prob"),
    ("P_t", "p_taxable_income", "prob"),
    ("depreciation_basis", "depreciation_basis", "money"),
    ("depreciation_life_months", "depreciation_life_months", "count"),
    ("discount_rate", "discount_rate", "rate"),
]


def effective(deal, field):
    defaults = {
        "depreciation_basis": deal["sale_price"],
        "depreciation_life_months": deal["term_months"],
        "discount_rate": deal["borrow_cost_after"],
    }
    return deal.get(field, defaults.get(field))


def tornado(deal, perturbation=0.10):
    base_sl, base_b, _ = net_positions(deal)
    rows = []
    for symbol, field, kind in PARAMETERS:
        base = float(effective(deal, field))

        def bump(factor):
            x = base * factor
            if kind == "prob":
                return min(max(x, 0.0), 1.0)
            if kind == "count":
                return float(max(round(x), 1))
            return x

        deltas = {}
        for side, factor in (("low", 1 - perturbation), ("high", 1 + perturbation)):
            x = bump(factor)
            moved = dict(deal)
            moved[field] = int(x) if kind == "count" else x
            sl, b, _ = net_positions(moved)
            deltas[side] = (x, sl - base_sl, b - base_b, (sl - b) - (base_sl - base_b))
        rows.append({
            "parameter": symbol,
            "low": deltas["low"][0],
            "high": deltas["high"][0],
            "delta_n_sl_low": deltas["low"][1],
            "delta_n_sl_high": deltas["high"][1],
            "delta_n_b_low": deltas["low"][2],
            "delta_n_b_high": deltas["high"][2],
            "delta_diff_low": deltas["low"][3],
            "delta_diff_high": deltas["high"][3],
            "swing": max(abs(deltas["low"][3]), abs(deltas["high"][3])),
        })
    # Rank by swing; near-ties (floating noise on parameters that do not
    # enter either formula) compare as equal and fall back to the symbol.
    scale = max(r["swing"] for r in rows)
    rows.sort(key=lambda r: (-round(r["swing"] / scale, 9), r["parameter"]))
    return rows


def main():
    scenario = json.loads((ROOT / "fixtures" / "desk1.json").read_text())
    deal = scenario["deal"]
    n_sl, n_b, (l_s, i_pv, d_pv, tv) = net_positions(deal)
    golden = {
        "scenario": "fixtures/desk1.json",
        "cashflows": {"lease_pv": l_s, "interest_pv": i_pv, "depreciation_pv": d_pv, "terminal_value_pv": tv},
        "n_sl": n_sl,
        "n_b": n_b,
        "conditions": conditions(scenario),
        "tornado_perturbation": 0.10,
        "tornado": tornado(deal),
    }
    out = ROOT / "fixtures" / "golden" / "desk1.golden.json"
    out.write_text(json.dumps(golden, indent=2) + "\n")
    header = ["scenario_name", "N_sl", "N_b"] + [f"B{i}" for i in range(1, 7)] + [f"S{i}" for i in range(1, 8)] + ["recommendation"]
    (ROOT / "fixtures" / "golden" / "batch_header.csv").write_text(",".join(header) + "\n")
    print(f"N_sl = {n_sl!r}\nN_b  = {n_b!r}\nwrote {out}")


if __name__ == "__main__":
    main()
