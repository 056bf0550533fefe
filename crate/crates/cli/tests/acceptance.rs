//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs with `cargo test -p slb-cli --test acceptance`.

mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use slb_core::cashflow::{amortization_schedule, RatePerPeriod};
use slb_core::curve::{central_d1, central_d3, d1, d3, Interpolation, SampledCurve};
use slb_core::deal::{CashflowSummary, DealParameters, LeaseClassification, Probability};
use slb_core::engine::{self, recommendation_rule, ConditionId};
use slb_core::scenario::{parse_scenario, serialize_scenario, ReportDocument, Scenario};
use slb_core::sensitivity::{self, Variable};
use tower::ServiceExt;

const DESK1: &str = include_str!("../../../fixtures/desk1.json");
const GOLDEN: &str = include_str!("../../../fixtures/golden/desk1.golden.json");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prob(rng: &mut ChaCha8Rng) -> Probability {
    // Endpoints are legal values, so hit them now and then.
    match rng.gen_range(0..20) {
        0 => Probability(0.0),
        1 => Probability(1.0),
        _ => Probability(rng.gen_range(0.0..1.0)),
    }
}

/// A deal that passes validation. `curve_safe` keeps S, P, DC, R_bb and R_f
/// inside the DESK-1 curve domains with room for the difference stencils.
fn draw_deal(rng: &mut ChaCha8Rng, curve_safe: bool) -> DealParameters {
    let (sale_price, loan_principal) = if curve_safe {
        (rng.gen_range(6.1e6..13.9e6), rng.gen_range(4.1e6..11.9e6))
    } else {
        let s = 10f64.powf(rng.gen_range(4.0..9.0));
        (s, s * rng.gen_range(0.05..1.2))
    };
    let term_months = rng.gen_range(1..=360);
    let optional = rng.gen_bool(0.5);
    DealParameters {
        sale_price,
        loan_principal,
        monthly_rent: sale_price * rng.gen_range(0.0..0.02),
        term_months,
        implicit_lease_rate: rng.gen_range(0.0..0.2),
        borrow_cost_before: if curve_safe { rng.gen_range(0.045..0.135) } else { rng.gen_range(0.0..0.25) },
        borrow_cost_after: rng.gen_range(0.0..0.25),
        firm_borrow_cost: if curve_safe { rng.gen_range(0.055..0.145) } else { rng.gen_range(0.0..0.3) },
        tax_rate_seller_lessee: rng.gen_range(0.0..0.6),
        tax_rate_buyer_lessor: rng.gen_range(0.0..0.6),
        txn_cost_slb: rng.gen_range(0.0..0.1),
        txn_cost_loan: rng.gen_range(0.0..0.1),
        leverage_benefit: sale_price * rng.gen_range(0.0..0.05),
        leverage_penalty_rate: rng.gen_range(0.0..0.1),
        debt_to_capital: if curve_safe { rng.gen_range(0.12..0.88) } else { rng.gen_range(0.01..0.99) },
        total_capital: sale_price * rng.gen_range(1.0..10.0),
        terminal_value_pv: sale_price * rng.gen_range(0.0..0.5),
        p_bankrupt_slb: prob(rng),
        p_bankrupt_borrow: prob(rng),
        p_lessor_bankrupt_slb: prob(rng),
        p_lessor_bankrupt_borrow: prob(rng),
        p_taxable_income: prob(rng),
        classification: if rng.gen_bool(0.5) { LeaseClassification::Capital } else { LeaseClassification::Operating },
        depreciation_basis: optional.then(|| sale_price * rng.gen_range(0.0..1.0)),
        depreciation_life_months: optional.then(|| rng.gen_range(1..=480)),
        discount_rate: optional.then(|| rng.gen_range(0.0..0.2)),
    }
}

fn formula_parity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let deals: Vec<_> = (0..1000).map(|_| draw_deal(&mut rng, false)).collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (k, deal) in deals.iter().enumerate() {
        check(deal.validate().iter().all(|f| !f.is_violation()), || format!("draw {k} is not a valid deal"))?;
        let (sl, b) = sensitivity::net_positions(deal).map_err(|e| format!("draw {k}: {e}"))?;
        let (osl, ob) = oracle::net_positions(deal);
        let err = rel_err(sl, osl).max(rel_err(b, ob));
        worst = worst.max(err);
        check(err <= 1e-9, || format!("draw {k}: engine ({sl}, {b}) vs oracle ({osl}, {ob})"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 draws, worst rel err {worst:.1e}, {elapsed:.2?}"))
}

fn mini_deal() -> (CashflowSummary, DealParameters) {
    let mut p = parse_scenario(DESK1).unwrap().deal;
    p.sale_price = 100.0;
    p.txn_cost_slb = 0.1;
    p.tax_rate_seller_lessee = 0.4;
    p.p_taxable_income = Probability(0.5);
    p.leverage_benefit = 5.0;
    p.p_bankrupt_slb = Probability(0.0);
    p.terminal_value_pv = 10.0;
    p.loan_principal = 100.0;
    p.txn_cost_loan = 0.05;
    p.leverage_penalty_rate = 0.02;
    p.debt_to_capital = 0.5;
    p.total_capital = 1000.0;
    p.p_bankrupt_borrow = Probability(0.0);
    (CashflowSummary::from_values(50.0, 30.0, 20.0, 10.0), p)
}

fn worked_examples() -> Outcome {
    let (cf, p) = mini_deal();
    let n_sl = engine::net_position_slb_capital(&cf, &p).map_err(|e| e.to_string())?.value;
    let n_b = engine::net_position_borrow(&cf, &p).value;
    check((n_sl - 79.0).abs() / 79.0 <= 1e-12, || format!("N_sl = {n_sl}"))?;
    check((n_b - 83.0).abs() / 83.0 <= 1e-12, || format!("N_b = {n_b}"))?;
    Ok(format!("N_sl = {n_sl}, N_b = {n_b}"))
}

fn amortization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst: f64 = 0.0;
    let mut worst_final: f64 = 0.0;
    for k in 0..100 {
        let principal = 10f64.powf(rng.gen_range(2.0..8.0));
        let annual = if k % 10 == 0 { 0.0 } else { rng.gen_range(0.0..0.3) };
        let n = rng.gen_range(1..=480);
        let rows = amortization_schedule(principal, RatePerPeriod::annual(annual), n).map_err(|e| e.to_string())?;
        let reference = oracle::schedule(principal, annual / 12.0, n);
        check(rows.len() == reference.len(), || format!("case {k}: {} rows", rows.len()))?;
        for (row, &(interest, paid, balance)) in rows.iter().zip(&reference) {
            // The closing balance is zero up to roundoff on both sides and is
            // held to the absolute bound below instead.
            let balance_err = if row.period_index == n { 0.0 } else { rel_err(row.balance_after, balance) };
            let err = rel_err(row.interest, interest).max(rel_err(row.principal, paid)).max(balance_err);
            worst = worst.max(err);
            check(err <= 1e-8, || {
                format!("case {k} month {}: ({}, {}, {}) vs ({interest}, {paid}, {balance})", row.period_index, row.interest, row.principal, row.balance_after)
            })?;
        }
        // The closing row absorbs rounding; the absorbed amount must be tiny.
        let last = rows.last().unwrap();
        let final_balance = last.balance_after.abs();
        let absorbed = (last.payment - rows[0].payment).abs() / rows[0].payment;
        worst_final = worst_final.max(final_balance);
        check(final_balance < 1e-6, || format!("case {k}: final balance {final_balance}"))?;
        check(absorbed <= 1e-8, || format!("case {k}: closing row absorbed {absorbed:.1e} of a payment"))?;
    }
    Ok(format!("100 cases, worst rel err {worst:.1e}, worst final balance {worst_final:.1e}"))
}

fn limit_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let mut d = draw_deal(&mut rng, false);
        d.p_bankrupt_slb = Probability(1.0);
        d.p_bankrupt_borrow = Probability(1.0);
        let (sl, b) = sensitivity::net_positions(&d).map_err(|e| e.to_string())?;
        let (want_sl, want_b) = (d.sale_price * (1.0 - d.txn_cost_slb), d.loan_principal * (1.0 - d.txn_cost_loan));
        let err = rel_err(sl, want_sl).max(rel_err(b, want_b));
        worst = worst.max(err);
        check(err <= 1e-9, || format!("draw {k}: ({sl}, {b}) vs ({want_sl}, {want_b})"))?;

        d.discount_rate = Some(0.0);
        let cf = d.derive_cashflows().map_err(|e| e.to_string())?;
        let n = d.term_months;
        let payment = cf.amortization[0].payment;
        let paid: f64 = cf.amortization.iter().map(|r| r.payment).sum();
        let life = d.effective_depreciation_life();
        let dep_total = d.effective_depreciation_basis() * f64::from(life.min(n)) / f64::from(life);
        let checks = [
            ("L_s", cf.lease_pv, d.monthly_rent * f64::from(n)),
            ("I", cf.interest_pv, paid - d.loan_principal),
            ("I (level)", cf.interest_pv, payment * f64::from(n) - d.loan_principal),
            ("D", cf.depreciation_pv, dep_total),
        ];
        for (name, got, want) in checks {
            let err = rel_err(got, want);
            worst = worst.max(err);
            check(err <= 1e-9, || format!("draw {k}: {name} = {got}, expected {want}"))?;
        }
    }
    Ok(format!("500 draws, worst rel err {worst:.1e}"))
}

fn condition_semantics() -> Outcome {
    let base = parse_scenario(DESK1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut held = [0usize; 13];
    for k in 0..1000 {
        let mut scenario = base.clone();
        scenario.deal = draw_deal(&mut rng, true);
        let report = scenario.evaluate().map_err(|e| format!("scenario {k}: {e}"))?.report;
        check(report.conditions.len() == 13, || format!("scenario {k}: {} conditions", report.conditions.len()))?;
        let mut holds = [false; 13];
        for (i, c) in report.conditions.iter().enumerate() {
            check(c.id == ConditionId::ALL[i], || format!("scenario {k}: condition order"))?;
            check(c.holds == (c.margin > 0.0), || format!("scenario {k} {}: holds {} margin {}", c.id, c.holds, c.margin))?;
            holds[i] = c.holds;
            held[i] += usize::from(c.holds);
        }
        let want = oracle::rule(&holds, report.n_sl.value, report.n_b.value);
        check(report.recommendation.to_string() == want, || format!("scenario {k}: {} vs {want}", report.recommendation))?;
    }
    let mut patterns = 0;
    for bits in 0u32..(1 << 13) {
        let holds: [bool; 13] = std::array::from_fn(|i| bits & (1 << i) != 0);
        for (n_sl, n_b) in [(1.0, 1.0), (-1.0, -1.0), (0.0, 0.0), (-1.0, 1.0), (1.0, -1.0)] {
            let got = recommendation_rule(&holds, n_sl, n_b).to_string();
            let want = oracle::rule(&holds, n_sl, n_b);
            check(got == want, || format!("pattern {bits:013b} ({n_sl}, {n_b}): {got} vs {want}"))?;
        }
        patterns += 1;
    }
    let ever: usize = held.iter().filter(|&&h| h > 0).count();
    Ok(format!("1000 scenarios ({ever}/13 conditions seen holding), {patterns} patterns"))
}

fn finite_differences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let [a, b, c, e]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let quad = |x: f64| a * x * x + b * x + c;
        let cubic = |x: f64| e * x * x * x + a * x * x + b * x + c;
        let x = rng.gen_range(-1.0..1.0);
        // Above the regime where eps * |f| / h^3 rounding reaches 1e-9.
        let h = rng.gen_range(0.05..0.25);

        let want1 = 2.0 * a * x + b;
        let got1 = central_d1(quad, x, h);
        let want3 = 6.0 * e;
        let got3 = central_d3(cubic, x, h);
        for (name, got, want) in [("d1", got1, want1), ("d3", got3, want3)] {
            let err = rel_err(got, want);
            worst = worst.max(err);
            check(err <= 1e-9, || format!("case {k} {name}: {got} vs {want} (x={x}, h={h})"))?;
        }

        // Same exactness through a sampled cubic-spline curve.
        let qc = SampledCurve::from_fn(-2.0, 2.0, 21, Interpolation::Cubic, quad).map_err(|e| e.to_string())?;
        let cc = SampledCurve::from_fn(-2.0, 2.0, 21, Interpolation::Cubic, cubic).map_err(|e| e.to_string())?;
        let g1 = d1(&qc, x, h).map_err(|e| e.to_string())?;
        let g3 = d3(&cc, x, h).map_err(|e| e.to_string())?;
        for (name, got, want) in [("curve d1", g1, want1), ("curve d3", g3, want3)] {
            let err = rel_err(got, want);
            worst = worst.max(err);
            check(err <= 1e-9, || format!("case {k} {name}: {got} vs {want} (x={x}, h={h})"))?;
        }
    }

    let quintic = |x: f64| x.powi(5) - 2.0 * x.powi(4) + x * x - 3.0 * x;
    let exact = |x: f64| 5.0 * x.powi(4) - 8.0 * x.powi(3) + 2.0 * x - 3.0;
    let x = 0.7;
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (central_d1(quintic, x, h) - exact(x)).abs()).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    check(ratios.iter().all(|r| (3.5..=4.5).contains(r)), || format!("error ratios {ratios:?}"))?;
    Ok(format!("400 exactness checks, worst rel err {worst:.1e}; d1 halving ratios {:.3?}", ratios))
}

fn breakeven() -> Outcome {
    // Cashflows pinned to L_s = 50, I = 30, D = 20 so N_sl(S) = 0.9 S - 11 and N_b = 83.
    let (_, mut p) = mini_deal();
    p.term_months = 1;
    p.discount_rate = Some(0.0);
    p.monthly_rent = 50.0;
    p.firm_borrow_cost = 3.6;
    p.depreciation_basis = Some(20.0);
    p.depreciation_life_months = Some(1);
    let mut scenario = parse_scenario(DESK1).unwrap();
    scenario.deal = p;

    let start = Instant::now();
    let r = sensitivity::breakeven(&scenario, Variable::SalePrice, 0.0, 1e9).map_err(|e| e.to_string())?;
    let mini_time = start.elapsed();
    check((r.n_b - 83.0).abs() < 1e-9, || format!("N_b = {}", r.n_b))?;
    check((r.value - 940.0 / 9.0).abs() < 1e-4, || format!("S* = {}", r.value))?;
    check(r.residual.abs() < 1e-6 * r.n_b.abs().max(1.0), || format!("residual {}", r.residual))?;

    let desk = parse_scenario(DESK1).unwrap();
    let start = Instant::now();
    let d = sensitivity::breakeven(&desk, Variable::SalePrice, 0.0, 1e9).map_err(|e| e.to_string())?;
    let desk_time = start.elapsed();
    check((d.n_sl - d.n_b).abs() < 1e-6 * d.n_b.abs().max(1.0), || format!("DESK-1 residual {}", d.n_sl - d.n_b))?;
    check(mini_time.max(desk_time) < Duration::from_secs(1), || format!("took {mini_time:?} / {desk_time:?}"))?;
    Ok(format!(
        "S* = {:.6} (residual {:.1e}, {mini_time:.2?}); DESK-1 S* = {:.2} (residual {:.1e}, {desk_time:.2?})",
        r.value, r.residual, d.value, d.n_sl - d.n_b
    ))
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    let base = parse_scenario(DESK1).unwrap();
    (any::<u64>(), "\\PC{0,24}", proptest::option::of("\\PC{0,40}")).prop_map(move |(seed, name, notes)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = base.clone();
        let curve_safe = rng.gen_bool(0.5);
        s.deal = draw_deal(&mut rng, curve_safe);
        s.meta.name = name;
        s.meta.notes = notes;
        s.options.fd_step = rng.gen_bool(0.3).then(|| rng.gen_range(1e-6..1e-2));
        if rng.gen_bool(0.3) {
            s.curves = Default::default();
        }
        s
    })
}

fn report_numbers(v: &Value) -> Vec<(String, f64)> {
    let r = &v["report"];
    let mut out = vec![
        ("n_sl".to_string(), r["n_sl"]["value"].as_f64().unwrap()),
        ("n_b".to_string(), r["n_b"]["value"].as_f64().unwrap()),
    ];
    for c in r["conditions"].as_array().unwrap() {
        out.push((format!("{} margin", c["id"].as_str().unwrap()), c["margin"].as_f64().unwrap()));
    }
    for k in ["lease_pv", "interest_pv", "depreciation_pv", "terminal_value_pv"] {
        out.push((k.to_string(), v["cashflows"][k].as_f64().unwrap()));
    }
    out
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

fn round_trip_and_parity() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 256, failure_persistence: None, ..Config::default() });
    runner
        .run(&scenario_strategy(), |s| {
            let text = serialize_scenario(&s);
            let back = slb_core::scenario::parse_scenario_unchecked(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(serialize_scenario(&back), text);
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let library: Value = serde_json::from_str(&ReportDocument::build(parse_scenario(DESK1).unwrap(), "t").unwrap().to_json()).unwrap();

    let output = Command::new(env!("CARGO_BIN_EXE_slb-decider"))
        .args(["evaluate", concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/desk1.json")])
        .output()
        .map_err(|e| e.to_string())?;
    check(output.status.success(), || String::from_utf8_lossy(&output.stderr).into_owned())?;
    let cli: Value = serde_json::from_slice(&output.stdout).map_err(|e| e.to_string())?;

    let service = tokio::runtime::Builder::new_current_thread().build().unwrap().block_on(async {
        let request = Request::post("/api/v1/evaluate").body(Body::from(DESK1)).unwrap();
        let response = slb_service::router(None).oneshot(request).await.unwrap();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        serde_json::from_slice::<Value>(&bytes).unwrap()
    });
    check(service["ok"] == true, || format!("service error {}", service["error"]))?;
    let service = service["result"].clone();

    check(without_timestamp(cli.clone()) == without_timestamp(library.clone()), || "CLI and library reports differ".into())?;
    check(without_timestamp(service.clone()) == without_timestamp(library.clone()), || "service and library reports differ".into())?;
    let (lib, cli_n, svc_n) = (report_numbers(&library), report_numbers(&cli), report_numbers(&service));
    check(lib.iter().zip(&cli_n).zip(&svc_n).all(|((a, b), c)| a.1.to_bits() == b.1.to_bits() && a.1.to_bits() == c.1.to_bits()), || {
        "numbers differ bitwise".into()
    })?;

    let golden: Value = serde_json::from_str(GOLDEN).unwrap();
    let mut compared = 0;
    for (name, value) in &lib {
        let want = match name.as_str() {
            "n_sl" | "n_b" => golden[name.as_str()].as_f64(),
            "lease_pv" | "interest_pv" | "depreciation_pv" | "terminal_value_pv" => golden["cashflows"][name.as_str()].as_f64(),
            _ => golden["conditions"][name.trim_end_matches(" margin")]["margin"].as_f64(),
        };
        if let Some(want) = want {
            check(rel_err(*value, want) <= 1e-9, || format!("{name}: {value} vs golden {want}"))?;
            compared += 1;
        }
    }
    Ok(format!("256 generated scenarios round-trip; CLI, library and service agree bitwise; {compared} values match the oracle goldens"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("verbatim formula parity", formula_parity),
        ("worked mini-examples", worked_examples),
        ("amortization oracle", amortization),
        ("limit identities", limit_identities),
        ("condition semantics", condition_semantics),
        ("finite differences", finite_differences),
        ("breakeven", breakeven),
        ("round-trip and parity", round_trip_and_parity),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, criterion) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
