//! Human-readable tables for `evaluate --pretty` and `compare`.

use std::fmt::Write;

use slb_core::engine::{ConditionResult, NetPosition};
use slb_core::scenario::ReportDocument;

fn money(v: f64) -> String {
    let neg = v < 0.0;
    let whole = format!("{:.2}", v.abs());
    let (int, frac) = whole.split_once('.').unwrap_or((&whole, "00"));
    let mut grouped = String::new();
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    format!("{}{grouped}.{frac}", if neg { "-" } else { "" })
}

fn badge(c: &ConditionResult) -> &'static str {
    if c.holds {
        "holds"
    } else {
        "fails"
    }
}

fn components(out: &mut String, title: &str, n: &NetPosition) {
    let _ = writeln!(out, "{title}");
    for c in &n.components {
        let _ = writeln!(out, "  {:<28} {:>20}", c.label, money(c.value));
    }
    let _ = writeln!(out, "  {:<28} {:>20}", "total", money(n.value));
}

fn dashboard(out: &mut String, conditions: &[ConditionResult]) {
    let _ = writeln!(out, "{:<4} {:<6} {:>22} {:>22} {:>22}", "id", "state", "lhs", "rhs", "margin");
    for c in conditions {
        let _ = writeln!(out, "{:<4} {:<6} {:>22.6} {:>22.6} {:>22.6}", c.id.to_string(), badge(c), c.lhs, c.rhs, c.margin);
    }
}

pub fn pretty_report(doc: &ReportDocument) -> String {
    let report = &doc.evaluation.report;
    let cf = &doc.evaluation.cashflows;
    let mut out = String::new();
    let _ = writeln!(out, "scenario        {}", doc.scenario.meta.name);
    let _ = writeln!(out, "classification  {:?}", report.classification);
    let _ = writeln!(out, "recommendation  {}", report.recommendation);
    let _ = writeln!(out);
    let _ = writeln!(out, "L_s  {:>20}", money(cf.lease_pv));
    let _ = writeln!(out, "I    {:>20}", money(cf.interest_pv));
    let _ = writeln!(out, "D    {:>20}", money(cf.depreciation_pv));
    let _ = writeln!(out, "TV   {:>20}", money(cf.terminal_value_pv));
    let _ = writeln!(out);
    components(&mut out, "N_sl (sale-leaseback)", &report.n_sl);
    let _ = writeln!(out);
    components(&mut out, "N_b (borrow)", &report.n_b);
    let _ = writeln!(out);
    dashboard(&mut out, &report.conditions);
    if !report.failing_conditions.is_empty() {
        let failing: Vec<_> = report.failing_conditions.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "\nfailing: {}", failing.join(" "));
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

/// N_sl and N_b components side by side, then the condition dashboard.
pub fn compare(doc: &ReportDocument) -> String {
    let report = &doc.evaluation.report;
    let mut out = String::new();
    let _ = writeln!(out, "{:<28} {:>20}   {:<28} {:>20}", "sale-leaseback", "", "borrow", "");
    let rows = report.n_sl.components.len().max(report.n_b.components.len());
    for i in 0..rows {
        let left = report.n_sl.components.get(i);
        let right = report.n_b.components.get(i);
        let _ = writeln!(
            out,
            "{:<28} {:>20}   {:<28} {:>20}",
            left.map_or("", |c| c.label.as_str()),
            left.map_or(String::new(), |c| money(c.value)),
            right.map_or("", |c| c.label.as_str()),
            right.map_or(String::new(), |c| money(c.value)),
        );
    }
    let _ = writeln!(out, "{:<28} {:>20}   {:<28} {:>20}", "N_sl", money(report.n_sl.value), "N_b", money(report.n_b.value));
    let _ = writeln!(out, "N_sl - N_b = {}", money(report.n_sl.value - report.n_b.value));
    let _ = writeln!(out);
    dashboard(&mut out, &report.conditions);
    let _ = writeln!(out, "\nrecommendation: {}", report.recommendation);
    out
}
