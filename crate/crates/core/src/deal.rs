//! Deal parameters for the sale-leaseback / new-debt choice, their bounds
//! checks, and the derived present values consumed by the decision engine.
//!
//! Naming follows the retailer's side of the deal: the retailer is the
//! seller-lessee under the sale-leaseback and the borrower under the loan.
//! `tax_rate_seller_lessee` is the rate applied to the retailer in every
//! formula; `tax_rate_buyer_lessor` only feeds the operating-lease
//! differential note.

use serde::{Deserialize, Serialize};

use crate::cashflow::{
    amortization_schedule, interest_stream, pv_level_stream, pv_stream, straight_line_depreciation,
    AmortizationRow, Money, PaymentStream, RatePerPeriod,
};
use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(pub f64);

impl Probability {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Survival weight `1 - p`.
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaseClassification {
    Capital,
    Operating,
}

/// Every scalar input of the model. Rates are annual fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DealParameters {
    /// S
    pub sale_price: Money,
    /// P, borrowed over the same term as the lease.
    pub loan_principal: Money,
    pub monthly_rent: Money,
    pub term_months: u32,
    /// R_s
    pub implicit_lease_rate: f64,
    /// R_bb
    pub borrow_cost_before: f64,
    /// R_ba
    pub borrow_cost_after: f64,
    /// R_f
    pub firm_borrow_cost: f64,
    /// R_ts
    pub tax_rate_seller_lessee: f64,
    /// R_tb
    pub tax_rate_buyer_lessor: f64,
    /// R_sl, fraction of the sale price.
    pub txn_cost_slb: f64,
    /// R_ltc, fraction of the loan principal.
    pub txn_cost_loan: f64,
    /// R_a in present-value currency, as it enters the sale-leaseback net position.
    pub leverage_benefit: Money,
    /// R_dlev, increase in borrowing cost from higher leverage.
    pub leverage_penalty_rate: f64,
    /// DC
    pub debt_to_capital: f64,
    /// TC
    pub total_capital: Money,
    /// TV, already a present value.
    pub terminal_value_pv: Money,
    /// P_dss
    pub p_bankrupt_slb: Probability,
    /// P_dsb
    pub p_bankrupt_borrow: Probability,
    /// P_dls (reported only)
    pub p_lessor_bankrupt_slb: Probability,
    /// P_dlb (reported only)
    pub p_lessor_bankrupt_borrow: Probability,
    /// P_t
    pub p_taxable_income: Probability,
    pub classification: LeaseClassification,
    /// Defaults to the sale price.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depreciation_basis: Option<Money>,
    /// Defaults to the lease term.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depreciation_life_months: Option<u32>,
    /// Annual discount rate for every PV; defaults to `borrow_cost_after`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_rate: Option<f64>,
}

impl DealParameters {
    pub fn effective_depreciation_basis(&self) -> Money {
        self.depreciation_basis.unwrap_or(self.sale_price)
    }

    pub fn effective_depreciation_life(&self) -> u32 {
        self.depreciation_life_months.unwrap_or(self.term_months)
    }

    pub fn effective_discount_rate(&self) -> f64 {
        self.discount_rate.unwrap_or(self.borrow_cost_after)
    }

    pub fn discount(&self) -> RatePerPeriod {
        RatePerPeriod::annual(self.effective_discount_rate())
    }

    pub fn loan_rate(&self) -> RatePerPeriod {
        RatePerPeriod::annual(self.firm_borrow_cost)
    }

    /// Bounds checks. Empty iff every invariant holds with no value sitting
    /// on a strict bound.
    pub fn validate(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        let check_finite = |out: &mut Vec<Finding>, name: &str, v: f64| {
            if !v.is_finite() {
                out.push(Finding::violation(deal_path(name), format!("{name} must be finite")));
                false
            } else {
                true
            }
        };

        for (name, v) in [
            ("sale_price", self.sale_price),
            ("loan_principal", self.loan_principal),
            ("total_capital", self.total_capital),
        ] {
            if check_finite(&mut out, name, v) && v <= 0.0 {
                out.push(Finding::violation(deal_path(name), format!("{name} must be > 0, got {v}")));
            }
        }

        if check_finite(&mut out, "monthly_rent", self.monthly_rent) && self.monthly_rent < 0.0 {
            out.push(Finding::violation(
                deal_path("monthly_rent"),
                format!("monthly_rent must be >= 0, got {}", self.monthly_rent),
            ));
        }
        check_finite(&mut out, "leverage_benefit", self.leverage_benefit);
        check_finite(&mut out, "terminal_value_pv", self.terminal_value_pv);

        if self.term_months == 0 {
            out.push(Finding::violation(deal_path("term_months"), "term_months must be >= 1"));
        }
        if self.depreciation_life_months == Some(0) {
            out.push(Finding::violation(
                deal_path("depreciation_life_months"),
                "depreciation_life_months must be >= 1",
            ));
        }
        if let Some(basis) = self.depreciation_basis {
            if check_finite(&mut out, "depreciation_basis", basis) && basis < 0.0 {
                out.push(Finding::violation(
                    deal_path("depreciation_basis"),
                    format!("depreciation_basis must be >= 0, got {basis}"),
                ));
            }
        }

        let dc = self.debt_to_capital;
        if check_finite(&mut out, "debt_to_capital", dc) && !(dc > 0.0 && dc < 1.0) {
            out.push(Finding::violation(
                deal_path("debt_to_capital"),
                format!("DC out of (0,1): {dc}"),
            ));
        }

        let mut rates = vec![
            ("implicit_lease_rate", self.implicit_lease_rate),
            ("borrow_cost_before", self.borrow_cost_before),
            ("borrow_cost_after", self.borrow_cost_after),
            ("firm_borrow_cost", self.firm_borrow_cost),
            ("tax_rate_seller_lessee", self.tax_rate_seller_lessee),
            ("tax_rate_buyer_lessor", self.tax_rate_buyer_lessor),
            ("txn_cost_slb", self.txn_cost_slb),
            ("txn_cost_loan", self.txn_cost_loan),
            ("leverage_penalty_rate", self.leverage_penalty_rate),
        ];
        if let Some(d) = self.discount_rate {
            rates.push(("discount_rate", d));
        }
        let probabilities = [
            ("p_bankrupt_slb", self.p_bankrupt_slb.0),
            ("p_bankrupt_borrow", self.p_bankrupt_borrow.0),
            ("p_lessor_bankrupt_slb", self.p_lessor_bankrupt_slb.0),
            ("p_lessor_bankrupt_borrow", self.p_lessor_bankrupt_borrow.0),
            ("p_taxable_income", self.p_taxable_income.0),
        ];
        for (name, v) in rates.into_iter().chain(probabilities) {
            if !check_finite(&mut out, name, v) {
                continue;
            }
            if !(0.0..=1.0).contains(&v) {
                out.push(Finding::violation(deal_path(name), format!("{name} out of [0,1]: {v}")));
            } else if v == 0.0 || v == 1.0 {
                out.push(Finding::warning(
                    deal_path(name),
                    format!("{name} = {v} is at strict bound (expected inside (0,1))"),
                ));
            }
        }
        out
    }

    /// Present values L_s, I, D and the pass-through TV.
    pub fn derive_cashflows(&self) -> Result<CashflowSummary> {
        let discount = self.discount();
        let term = self.term_months;
        let lease_pv = pv_level_stream(self.monthly_rent, discount, term)?;
        let schedule = amortization_schedule(self.loan_principal, self.loan_rate(), term)?;
        let interest_pv = pv_stream(&interest_stream(&schedule), discount)?;
        let depreciation = straight_line_depreciation(
            self.effective_depreciation_basis(),
            self.effective_depreciation_life(),
        )?
        .truncated(term);
        let depreciation_pv = pv_stream(&depreciation, discount)?;
        Ok(CashflowSummary {
            lease_pv,
            interest_pv,
            depreciation_pv,
            terminal_value_pv: self.terminal_value_pv,
            amortization: schedule,
            depreciation,
        })
    }
}

fn deal_path(field: &str) -> String {
    format!("deal.{field}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Violation,
    Warning,
}

/// One validation result, addressed by its field path in the scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl Finding {
    pub fn violation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Violation, path: path.into(), message: message.into() }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, path: path.into(), message: message.into() }
    }

    pub fn is_violation(&self) -> bool {
        self.severity == Severity::Violation
    }
}

/// Violations only; warnings pass.
pub fn ensure_valid(findings: &[Finding]) -> Result<()> {
    let violations: Vec<_> = findings.iter().filter(|f| f.is_violation()).cloned().collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations))
    }
}

/// Present values feeding the net positions, plus the schedules behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CashflowSummary {
    /// L_s
    pub lease_pv: Money,
    /// I
    pub interest_pv: Money,
    /// D, truncated at the lease term.
    pub depreciation_pv: Money,
    /// TV
    pub terminal_value_pv: Money,
    pub amortization: Vec<AmortizationRow>,
    pub depreciation: PaymentStream,
}

impl CashflowSummary {
    /// Summary with the four present values only, for exploring the formulas
    /// directly.
    pub fn from_values(lease_pv: Money, interest_pv: Money, depreciation_pv: Money, terminal_value_pv: Money) -> Self {
        Self {
            lease_pv,
            interest_pv,
            depreciation_pv,
            terminal_value_pv,
            amortization: Vec::new(),
            depreciation: PaymentStream::default(),
        }
    }
}
