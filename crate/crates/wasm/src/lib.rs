//! Browser bindings for the decision engine.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use serde::Serialize;
use slb_core::engine::Recommendation;
use slb_core::scenario::{parse_scenario, to_canonical_json, Scenario};
use slb_core::sensitivity::{self, linspace, Variable};
use wasm_bindgen::prelude::*;

/// Largest sweep the page may request; keeps a slider drag responsive.
pub const MAX_POINTS: usize = 2_001;

const DESK1: &str = include_str!("../../../fixtures/desk1.json");

#[derive(Serialize)]
struct ConditionView {
    id: String,
    holds: bool,
    margin: f64,
    note: Option<String>,
}

#[derive(Serialize)]
struct EvaluationView {
    n_sl: f64,
    n_b: f64,
    recommendation: Recommendation,
    conditions: Vec<ConditionView>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct SweepView {
    variable: Variable,
    xs: Vec<f64>,
    n_sl: Vec<Option<f64>>,
    n_b: Vec<Option<f64>>,
    breakeven: Option<f64>,
}

fn scenario(text: &str) -> Result<Scenario, String> {
    parse_scenario(text).map_err(|e| e.to_string())
}

fn variable(name: &str) -> Result<Variable, String> {
    name.parse::<Variable>().map_err(|e| e.to_string())
}

pub fn template_json() -> String {
    DESK1.to_string()
}

/// Net positions, condition badges and the recommendation.
pub fn evaluate_json(scenario_text: &str) -> Result<String, String> {
    let evaluation = scenario(scenario_text)?.evaluate().map_err(|e| e.to_string())?;
    let report = evaluation.report;
    let view = EvaluationView {
        n_sl: report.n_sl.value,
        n_b: report.n_b.value,
        recommendation: report.recommendation,
        conditions: report
            .conditions
            .into_iter()
            .map(|c| ConditionView { id: c.id.to_string(), holds: c.holds, margin: c.margin, note: c.note })
            .collect(),
        warnings: report.warnings,
    };
    Ok(to_canonical_json(&view))
}

/// Both net positions across `[from, to]`, plus the crossing point when the
/// grid brackets one.
pub fn sweep_json(scenario_text: &str, var: &str, from: f64, to: f64, steps: usize) -> Result<String, String> {
    if !(2..=MAX_POINTS).contains(&steps) {
        return Err(format!("steps must be between 2 and {MAX_POINTS}"));
    }
    let s = scenario(scenario_text)?;
    let v = variable(var)?;
    let table = sensitivity::sweep(&s, v, &linspace(from, to, steps)).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = table.rows.iter().map(|r| r.x).collect();
    let n_sl: Vec<Option<f64>> = table.rows.iter().map(|r| r.n_sl).collect();
    let n_b: Vec<Option<f64>> = table.rows.iter().map(|r| r.n_b).collect();

    let crossing = xs.windows(2).enumerate().find_map(|(i, w)| {
        let a = n_sl[i]? - n_b[i]?;
        let b = n_sl[i + 1]? - n_b[i + 1]?;
        (a.signum() != b.signum() || a == 0.0).then_some((w[0], w[1]))
    });
    let breakeven = match crossing {
        Some((lo, hi)) if Variable::BREAKEVEN.contains(&v) => {
            sensitivity::breakeven(&s, v, lo, hi).ok().map(|r| r.value)
        }
        _ => None,
    };
    Ok(to_canonical_json(&SweepView { variable: v, xs, n_sl, n_b, breakeven }))
}

pub fn breakeven_json(scenario_text: &str, var: &str, lo: f64, hi: f64) -> Result<String, String> {
    let result = sensitivity::breakeven(&scenario(scenario_text)?, variable(var)?, lo, hi).map_err(|e| e.to_string())?;
    Ok(to_canonical_json(&result))
}

#[wasm_bindgen]
pub fn template() -> String {
    template_json()
}

#[wasm_bindgen]
pub fn evaluate(scenario: &str) -> Result<String, JsError> {
    evaluate_json(scenario).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(scenario: &str, variable: &str, from: f64, to: f64, steps: usize) -> Result<String, JsError> {
    sweep_json(scenario, variable, from, to, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn breakeven(scenario: &str, variable: &str, lo: f64, hi: f64) -> Result<String, JsError> {
    breakeven_json(scenario, variable, lo, hi).map_err(|e| JsError::new(&e))
}
