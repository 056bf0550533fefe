//! What-if tooling over a scenario: breakeven (indifference) points between
//! the two net positions, parameter sweeps with argmax flags, and a tornado
//! ranking of one-at-a-time perturbations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deal::{ensure_valid, DealParameters, Probability};
use crate::engine::{evaluate, net_position_borrow, net_position_slb, Recommendation};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Scalar deal inputs addressable by sweeps, breakevens and the tornado.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    SalePrice,
    LoanPrincipal,
    MonthlyRent,
    TermMonths,
    ImplicitLeaseRate,
    BorrowCostBefore,
    BorrowCostAfter,
    FirmBorrowCost,
    TaxRateSellerLessee,
    TaxRateBuyerLessor,
    TxnCostSlb,
    TxnCostLoan,
    LeverageBenefit,
    LeveragePenaltyRate,
    DebtToCapital,
    TotalCapital,
    TerminalValue,
    PBankruptSlb,
    PBankruptBorrow,
    PLessorBankruptSlb,
    PLessorBankruptBorrow,
    PTaxableIncome,
    DepreciationBasis,
    DepreciationLife,
    DiscountRate,
}

impl Variable {
    pub const ALL: [Variable; 25] = [
        Variable::SalePrice,
        Variable::LoanPrincipal,
        Variable::MonthlyRent,
        Variable::TermMonths,
        Variable::ImplicitLeaseRate,
        Variable::BorrowCostBefore,
        Variable::BorrowCostAfter,
        Variable::FirmBorrowCost,
        Variable::TaxRateSellerLessee,
        Variable::TaxRateBuyerLessor,
        Variable::TxnCostSlb,
        Variable::TxnCostLoan,
        Variable::LeverageBenefit,
        Variable::LeveragePenaltyRate,
        Variable::DebtToCapital,
        Variable::TotalCapital,
        Variable::TerminalValue,
        Variable::PBankruptSlb,
        Variable::PBankruptBorrow,
        Variable::PLessorBankruptSlb,
        Variable::PLessorBankruptBorrow,
        Variable::PTaxableIncome,
        Variable::DepreciationBasis,
        Variable::DepreciationLife,
        Variable::DiscountRate,
    ];

    /// Variables the breakeven solver accepts.
    pub const BREAKEVEN: [Variable; 4] = [
        Variable::SalePrice,
        Variable::TaxRateSellerLessee,
        Variable::MonthlyRent,
        Variable::PBankruptSlb,
    ];

    /// `(symbol, scenario field name)`.
    fn names(self) -> (&'static str, &'static str) {
        use Variable::*;
        match self {
            SalePrice => ("S", "sale_price"),
            LoanPrincipal => ("P", "loan_principal"),
            MonthlyRent => ("monthly_rent", "monthly_rent"),
            TermMonths => ("term_months", "term_months"),
            ImplicitLeaseRate => ("R_s", "implicit_lease_rate"),
            BorrowCostBefore => ("R_bb", "borrow_cost_before"),
            BorrowCostAfter => ("R_ba", "borrow_cost_after"),
            FirmBorrowCost => ("R_f", "firm_borrow_cost"),
            TaxRateSellerLessee => ("R_ts", "tax_rate_seller_lessee"),
            TaxRateBuyerLessor => ("R_tb", "tax_rate_buyer_lessor"),
            TxnCostSlb => ("R_sl", "txn_cost_slb"),
            TxnCostLoan => ("R_ltc", "txn_cost_loan"),
            LeverageBenefit => ("R_a", "leverage_benefit"),
            LeveragePenaltyRate => ("R_dlev", "leverage_penalty_rate"),
            DebtToCapital => ("DC", "debt_to_capital"),
            TotalCapital => ("TC", "total_capital"),
            TerminalValue => ("TV", "terminal_value_pv"),
            PBankruptSlb => ("P_dss", "p_bankrupt_slb"),
            PBankruptBorrow => ("P_dsb", "p_bankrupt_borrow"),
            PLessorBankruptSlb => ("P_dls", "p_lessor_bankrupt_slb"),
            PLessorBankruptBorrow => ("P_dlb", "p_lessor_bankrupt_borrow"),
            PTaxableIncome => ("P_t", "p_taxable_income"),
            DepreciationBasis => ("depreciation_basis", "depreciation_basis"),
            DepreciationLife => ("depreciation_life_months", "depreciation_life_months"),
            DiscountRate => ("discount_rate", "discount_rate"),
        }
    }

    pub fn symbol(self) -> &'static str {
        self.names().0
    }

    pub fn is_probability(self) -> bool {
        use Variable::*;
        matches!(self, PBankruptSlb | PBankruptBorrow | PLessorBankruptSlb | PLessorBankruptBorrow | PTaxableIncome)
    }

    pub fn is_count(self) -> bool {
        matches!(self, Variable::TermMonths | Variable::DepreciationLife)
    }

    /// Effective value, with defaults resolved.
    pub fn get(self, p: &DealParameters) -> f64 {
        use Variable::*;
        match self {
            SalePrice => p.sale_price,
            LoanPrincipal => p.loan_principal,
            MonthlyRent => p.monthly_rent,
            TermMonths => f64::from(p.term_months),
            ImplicitLeaseRate => p.implicit_lease_rate,
            BorrowCostBefore => p.borrow_cost_before,
            BorrowCostAfter => p.borrow_cost_after,
            FirmBorrowCost => p.firm_borrow_cost,
            TaxRateSellerLessee => p.tax_rate_seller_lessee,
            TaxRateBuyerLessor => p.tax_rate_buyer_lessor,
            TxnCostSlb => p.txn_cost_slb,
            TxnCostLoan => p.txn_cost_loan,
            LeverageBenefit => p.leverage_benefit,
            LeveragePenaltyRate => p.leverage_penalty_rate,
            DebtToCapital => p.debt_to_capital,
            TotalCapital => p.total_capital,
            TerminalValue => p.terminal_value_pv,
            PBankruptSlb => p.p_bankrupt_slb.value(),
            PBankruptBorrow => p.p_bankrupt_borrow.value(),
            PLessorBankruptSlb => p.p_lessor_bankrupt_slb.value(),
            PLessorBankruptBorrow => p.p_lessor_bankrupt_borrow.value(),
            PTaxableIncome => p.p_taxable_income.value(),
            DepreciationBasis => p.effective_depreciation_basis(),
            DepreciationLife => f64::from(p.effective_depreciation_life()),
            DiscountRate => p.effective_discount_rate(),
        }
    }

    /// Sets the value. Counts round to the nearest whole month (negative
    /// values become 0 and fail validation downstream).
    pub fn set(self, p: &mut DealParameters, x: f64) {
        use Variable::*;
        let count = || x.round().max(0.0) as u32;
        match self {
            SalePrice => p.sale_price = x,
            LoanPrincipal => p.loan_principal = x,
            MonthlyRent => p.monthly_rent = x,
            TermMonths => p.term_months = count(),
            ImplicitLeaseRate => p.implicit_lease_rate = x,
            BorrowCostBefore => p.borrow_cost_before = x,
            BorrowCostAfter => p.borrow_cost_after = x,
            FirmBorrowCost => p.firm_borrow_cost = x,
            TaxRateSellerLessee => p.tax_rate_seller_lessee = x,
            TaxRateBuyerLessor => p.tax_rate_buyer_lessor = x,
            TxnCostSlb => p.txn_cost_slb = x,
            TxnCostLoan => p.txn_cost_loan = x,
            LeverageBenefit => p.leverage_benefit = x,
            LeveragePenaltyRate => p.leverage_penalty_rate = x,
            DebtToCapital => p.debt_to_capital = x,
            TotalCapital => p.total_capital = x,
            TerminalValue => p.terminal_value_pv = x,
            PBankruptSlb => p.p_bankrupt_slb = Probability(x),
            PBankruptBorrow => p.p_bankrupt_borrow = Probability(x),
            PLessorBankruptSlb => p.p_lessor_bankrupt_slb = Probability(x),
            PLessorBankruptBorrow => p.p_lessor_bankrupt_borrow = Probability(x),
            PTaxableIncome => p.p_taxable_income = Probability(x),
            DepreciationBasis => p.depreciation_basis = Some(x),
            DepreciationLife => p.depreciation_life_months = Some(count()),
            DiscountRate => p.discount_rate = Some(x),
        }
    }

    pub fn with(self, p: &DealParameters, x: f64) -> DealParameters {
        let mut out = p.clone();
        self.set(&mut out, x);
        out
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Variable {
    type Err = Error;

    /// Accepts the symbol (`S`, `R_ts`, `P_dss`) or the scenario field name.
    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| {
                let (symbol, field) = v.names();
                s == symbol || s == field
            })
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{s}`")))
    }
}

impl Serialize for Variable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Variable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(N_sl, N_b)` for a deal without bounds validation.
pub fn net_positions(p: &DealParameters) -> Result<(f64, f64)> {
    let cf = p.derive_cashflows()?;
    Ok((net_position_slb(&cf, p).value, net_position_borrow(&cf, p).value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenResult {
    pub variable: Variable,
    pub value: f64,
    /// N_sl - N_b at `value`.
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
    pub n_sl: f64,
    pub n_b: f64,
}

/// Root of `g` on `[lo, hi]` by bisection. `tol(x)` is the acceptance
/// threshold for `|g(x)|`. Returns `(root, g(root), tol(root), iterations)`.
pub fn bisect(
    mut g: impl FnMut(f64) -> Result<f64>,
    tol: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    max_iterations: u32,
) -> Result<(f64, f64, f64, u32)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bracket must satisfy lo < hi, got ({lo}, {hi})")));
    }
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo.is_nan() || g_hi.is_nan() || g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0 {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi });
    }
    for (x, gx) in [(lo, g_lo), (hi, g_hi)] {
        if gx.abs() < tol(x)? {
            return Ok((x, gx, tol(x)?, 0));
        }
    }
    let (mut a, mut b, mut g_a) = (lo, hi, g_lo);
    let mut last = (a, g_a);
    for iteration in 1..=max_iterations {
        let mid = 0.5 * (a + b);
        let g_mid = g(mid)?;
        let t = tol(mid)?;
        if g_mid.abs() < t {
            return Ok((mid, g_mid, t, iteration));
        }
        if g_mid.signum() == g_a.signum() {
            a = mid;
            g_a = g_mid;
        } else {
            b = mid;
        }
        last = (mid, g_mid);
    }
    Err(Error::NoConvergence { iterations: max_iterations as usize, residual: last.1 })
}

/// Value of `variable` at which N_sl = N_b, searched by bisection in
/// `[lo, hi]`. Points are evaluated without bounds validation.
pub fn breakeven(scenario: &Scenario, variable: Variable, lo: f64, hi: f64) -> Result<BreakevenResult> {
    if !Variable::BREAKEVEN.contains(&variable) {
        return Err(Error::InvalidInput(format!(
            "breakeven variable must be one of S, R_ts, monthly_rent, P_dss; got {variable}"
        )));
    }
    let deal = &scenario.deal;
    let rel = scenario.options.solver_tolerance;
    let g = |x: f64| -> Result<f64> {
        let (n_sl, n_b) = net_positions(&variable.with(deal, x))?;
        Ok(n_sl - n_b)
    };
    let tol = |x: f64| -> Result<f64> {
        let (_, n_b) = net_positions(&variable.with(deal, x))?;
        Ok(rel * n_b.abs().max(1.0))
    };
    let (value, residual, tolerance, iterations) =
        bisect(g, tol, lo, hi, scenario.options.solver_max_iterations)?;
    let (n_sl, n_b) = net_positions(&variable.with(deal, value))?;
    Ok(BreakevenResult { variable, value, residual, tolerance, iterations, bracket: (lo, hi), n_sl, n_b })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub n_sl: Option<f64>,
    pub n_b: Option<f64>,
    pub recommendation: Option<Recommendation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub argmax_n_sl: bool,
    pub argmax_n_b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: Variable,
    pub rows: Vec<SweepRow>,
}

/// `n` evenly spaced points from `from` to `to` inclusive; one point gives `[from]`.
pub fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![from],
        _ => {
            let step = (to - from) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { to } else { from + step * i as f64 }).collect()
        }
    }
}

fn sweep_point(scenario: &Scenario, variable: Variable, x: f64) -> SweepRow {
    let deal = variable.with(&scenario.deal, x);
    let outcome = ensure_valid(&deal.validate())
        .and_then(|_| evaluate(&deal, &scenario.curves, &scenario.eval_options()));
    match outcome {
        Ok(eval) => SweepRow {
            x,
            n_sl: Some(eval.report.n_sl.value),
            n_b: Some(eval.report.n_b.value),
            recommendation: Some(eval.report.recommendation),
            error: None,
            argmax_n_sl: false,
            argmax_n_b: false,
        },
        Err(e) => SweepRow {
            x,
            n_sl: None,
            n_b: None,
            recommendation: None,
            error: Some(e.to_string()),
            argmax_n_sl: false,
            argmax_n_b: false,
        },
    }
}

/// Full evaluation at every grid point, in grid order. Failures are recorded
/// in the row. The first row attaining each maximum is flagged.
pub fn sweep(scenario: &Scenario, variable: Variable, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid must not be empty".into()));
    }
    #[cfg(feature = "parallel")]
    let mut rows: Vec<SweepRow> = {
        use rayon::prelude::*;
        grid.par_iter().map(|&x| sweep_point(scenario, variable, x)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<SweepRow> = grid.iter().map(|&x| sweep_point(scenario, variable, x)).collect();

    if let Some(i) = argmax(rows.iter().map(|r| r.n_sl)) {
        rows[i].argmax_n_sl = true;
    }
    if let Some(i) = argmax(rows.iter().map(|r| r.n_b)) {
        rows[i].argmax_n_b = true;
    }
    Ok(SweepTable { variable, rows })
}

fn argmax(values: impl Iterator<Item = Option<f64>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if let Some(v) = v.filter(|v| !v.is_nan()) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoRow {
    pub parameter: Variable,
    pub base: f64,
    pub low: f64,
    pub high: f64,
    pub delta_n_sl_low: f64,
    pub delta_n_sl_high: f64,
    pub delta_n_b_low: f64,
    pub delta_n_b_high: f64,
    /// Change in N_sl - N_b.
    pub delta_diff_low: f64,
    pub delta_diff_high: f64,
    /// max(|delta_diff_low|, |delta_diff_high|), the ranking key.
    pub swing: f64,
}

pub const DEFAULT_PERTURBATION: f64 = 0.10;

/// Perturbs every scalar input by `±perturbation` (relative) one at a time and
/// ranks by the largest change in N_sl - N_b, ties broken by symbol.
/// Probabilities are clamped to [0, 1]; month counts round and stay >= 1.
pub fn tornado(scenario: &Scenario, perturbation: f64) -> Result<Vec<TornadoRow>> {
    if !(perturbation > 0.0 && perturbation.is_finite()) {
        return Err(Error::InvalidInput(format!("perturbation must be positive, got {perturbation}")));
    }
    let deal = &scenario.deal;
    ensure_valid(&deal.validate())?;
    let (base_sl, base_b) = net_positions(deal)?;

    let mut rows = Vec::with_capacity(Variable::ALL.len());
    for variable in Variable::ALL {
        let base = variable.get(deal);
        let bump = |factor: f64| {
            let x = base * factor;
            if variable.is_probability() {
                x.clamp(0.0, 1.0)
            } else if variable.is_count() {
                x.round().max(1.0)
            } else {
                x
            }
        };
        let (low, high) = (bump(1.0 - perturbation), bump(1.0 + perturbation));
        let (sl_low, b_low) = net_positions(&variable.with(deal, low))?;
        let (sl_high, b_high) = net_positions(&variable.with(deal, high))?;
        let delta_diff_low = (sl_low - b_low) - (base_sl - base_b);
        let delta_diff_high = (sl_high - b_high) - (base_sl - base_b);
        rows.push(TornadoRow {
            parameter: variable,
            base,
            low,
            high,
            delta_n_sl_low: sl_low - base_sl,
            delta_n_sl_high: sl_high - base_sl,
            delta_n_b_low: b_low - base_b,
            delta_n_b_high: b_high - base_b,
            delta_diff_low,
            delta_diff_high,
            swing: delta_diff_low.abs().max(delta_diff_high.abs()),
        });
    }
    // Swings equal to 9 significant digits of the largest one rank as ties.
    let scale = rows.iter().map(|r| r.swing).fold(0.0, f64::max);
    let rank = |r: &TornadoRow| if scale > 0.0 { (r.swing / scale * 1e9).round() as i64 } else { 0 };
    rows.sort_by(|a, b| rank(b).cmp(&rank(a)).then_with(|| a.parameter.symbol().cmp(b.parameter.symbol())));
    Ok(rows)
}
