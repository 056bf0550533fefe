//! Net positions under the sale-leaseback and under new borrowing, the two
//! condition sets that choose between them, and the recommendation rule.
//!
//! Formulas are evaluated as printed, including terms that add rates to
//! currency amounts. Symbols the conditions use without defining are mapped
//! as follows and echoed in every report:
//!
//! * `R_r` is read as the firm's borrowing cost `R_f`.
//! * `R_i` is read as the loan transaction cost `R_ltc` where it multiplies
//!   `P` or stands alone as a cost, and as the leverage penalty `R_dlev`
//!   where it multiplies `DC * TC` or is differentiated against `DC`.
//! * `R_ab` is read as `R_ba`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{d1, d3, CurveName, CurveSet, SampledCurve};
use crate::deal::{ensure_valid, CashflowSummary, DealParameters, LeaseClassification};
use crate::error::{Error, Result};

/// One labeled addend of a net position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetPosition {
    pub value: f64,
    pub components: Vec<Component>,
}

impl NetPosition {
    fn new(value: f64, components: &[(&str, f64)]) -> Self {
        Self {
            value,
            components: components
                .iter()
                .map(|&(label, value)| Component { label: label.to_string(), value })
                .collect(),
        }
    }

    pub fn component_sum(&self) -> f64 {
        self.components.iter().map(|c| c.value).sum()
    }
}

/// Sale-leaseback net position for a capital lease.
pub fn net_position_slb_capital(cf: &CashflowSummary, p: &DealParameters) -> Result<NetPosition> {
    if p.classification != LeaseClassification::Capital {
        return Err(Error::InvalidState("capital-lease net position requested for an operating lease".into()));
    }
    Ok(slb_capital(cf, p))
}

fn slb_capital(cf: &CashflowSummary, p: &DealParameters) -> NetPosition {
    let s = p.sale_price;
    let r_sl = p.txn_cost_slb;
    let l_s = cf.lease_pv;
    let r_ts = p.tax_rate_seller_lessee;
    let d = cf.depreciation_pv;
    let p_t = p.p_taxable_income.value();
    let r_a = p.leverage_benefit;
    let tv = cf.terminal_value_pv;
    let p_dss = p.p_bankrupt_slb.value();

    let value = s * (1.0 - r_sl) + (((l_s * r_ts) + (d * r_ts * p_t) - l_s + r_a + tv) * (1.0 - p_dss));

    let bracket = l_s * r_ts + d * r_ts * p_t - l_s + r_a + tv;
    NetPosition::new(
        value,
        &[
            ("gross_proceeds", s),
            ("transaction_cost", -s * r_sl),
            ("rent_tax_shield", l_s * r_ts),
            ("depreciation_tax_shield", d * r_ts * p_t),
            ("rent_burden", -l_s),
            ("leverage_benefit", r_a),
            ("terminal_value", tv),
            ("survival_scaling", -p_dss * bracket),
        ],
    )
}

/// Sale-leaseback net position for an operating lease: no terminal-value
/// reversion and no depreciation tax shield.
pub fn net_position_slb_operating(cf: &CashflowSummary, p: &DealParameters) -> Result<NetPosition> {
    if p.classification != LeaseClassification::Operating {
        return Err(Error::InvalidState("operating-lease net position requested for a capital lease".into()));
    }
    Ok(slb_operating(cf, p))
}

fn slb_operating(cf: &CashflowSummary, p: &DealParameters) -> NetPosition {
    let s = p.sale_price;
    let r_sl = p.txn_cost_slb;
    let l_s = cf.lease_pv;
    let r_ts = p.tax_rate_seller_lessee;
    let r_a = p.leverage_benefit;
    let p_dss = p.p_bankrupt_slb.value();

    let value = s * (1.0 - r_sl) + (((l_s * r_ts) - l_s + r_a) * (1.0 - p_dss));

    let bracket = l_s * r_ts - l_s + r_a;
    NetPosition::new(
        value,
        &[
            ("gross_proceeds", s),
            ("transaction_cost", -s * r_sl),
            ("rent_tax_shield", l_s * r_ts),
            ("rent_burden", -l_s),
            ("leverage_benefit", r_a),
            ("survival_scaling", -p_dss * bracket),
        ],
    )
}

/// Sale-leaseback net position for the deal's own classification.
pub fn net_position_slb(cf: &CashflowSummary, p: &DealParameters) -> NetPosition {
    match p.classification {
        LeaseClassification::Capital => slb_capital(cf, p),
        LeaseClassification::Operating => slb_operating(cf, p),
    }
}

/// Net position when the retailer borrows `P` instead.
pub fn net_position_borrow(cf: &CashflowSummary, p: &DealParameters) -> NetPosition {
    let principal = p.loan_principal;
    let r_ltc = p.txn_cost_loan;
    let i = cf.interest_pv;
    let r_ts = p.tax_rate_seller_lessee;
    let r_dlev = p.leverage_penalty_rate;
    let dc = p.debt_to_capital;
    let tc = p.total_capital;
    let p_dsb = p.p_bankrupt_borrow.value();

    let value = principal * (1.0 - r_ltc)
        + (((i * r_ts) - (r_dlev * dc * tc) + (r_ts * r_dlev * dc * tc) - i * (1.0 - r_ts)) * (1.0 - p_dsb));

    let bracket = i * r_ts - r_dlev * dc * tc + r_ts * r_dlev * dc * tc - i * (1.0 - r_ts);
    NetPosition::new(
        value,
        &[
            ("loan_proceeds", principal),
            ("transaction_cost", -principal * r_ltc),
            ("interest_tax_shield", i * r_ts),
            ("leverage_cost", -r_dlev * dc * tc),
            ("leverage_cost_tax_shield", r_ts * r_dlev * dc * tc),
            ("interest_burden", -i * (1.0 - r_ts)),
            ("survival_scaling", -p_dsb * bracket),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl ConditionId {
    pub const ALL: [ConditionId; 13] = [
        ConditionId::B1,
        ConditionId::B2,
        ConditionId::B3,
        ConditionId::B4,
        ConditionId::B5,
        ConditionId::B6,
        ConditionId::S1,
        ConditionId::S2,
        ConditionId::S3,
        ConditionId::S4,
        ConditionId::S5,
        ConditionId::S6,
        ConditionId::S7,
    ];

    pub fn is_borrow_set(self) -> bool {
        (self as usize) < 6
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

/// A single strict inequality `lhs <relation> rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub margin: f64,
}

impl Comparison {
    pub fn new(lhs: f64, relation: Relation, rhs: f64) -> Self {
        let margin = match relation {
            Relation::Less => rhs - lhs,
            Relation::Greater => lhs - rhs,
        };
        Self { lhs, relation, rhs, margin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub id: ConditionId,
    pub holds: bool,
    /// Sides of the binding comparison (the one with the smallest margin).
    pub lhs: f64,
    pub rhs: f64,
    /// Positive iff the condition holds. For conjunctions, the smallest part margin.
    pub margin: f64,
    /// Every comparison making up the condition; two for the conjunctions S5-S7.
    pub parts: Vec<Comparison>,
    pub inputs: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionResult {
    fn new(id: ConditionId, parts: Vec<Comparison>, inputs: &[(&str, f64)]) -> Self {
        let binding = parts
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("at least one comparison")
            .clone();
        let margin = if parts.iter().any(|c| c.margin.is_nan()) { f64::NAN } else { binding.margin };
        Self {
            id,
            holds: margin > 0.0,
            lhs: binding.lhs,
            rhs: binding.rhs,
            margin,
            parts,
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            note: None,
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// Options controlling derivative evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Finite-difference step; each curve defaults to its domain span / 1000.
    pub fd_step: Option<f64>,
}

struct Derivatives<'a> {
    curves: &'a CurveSet,
    step: Option<f64>,
}

impl Derivatives<'_> {
    fn curve(&self, name: CurveName) -> Result<&SampledCurve> {
        self.curves.get(name)
    }

    fn first(&self, name: CurveName, x: f64) -> Result<f64> {
        let c = self.curve(name)?;
        d1(c, x, self.step.unwrap_or_else(|| c.default_step()))
            .map_err(|e| annotate(e, name))
    }

    fn third(&self, name: CurveName, x: f64) -> Result<f64> {
        let c = self.curve(name)?;
        d3(c, x, self.step.unwrap_or_else(|| c.default_step()))
            .map_err(|e| annotate(e, name))
    }
}

fn annotate(e: Error, name: CurveName) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{name}: {m}")),
        Error::Capability(m) => Error::Capability(format!("{name}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("{name}: {m}")),
        other => other,
    }
}

const MIXED_UNITS: &str = "mixed units: rates and currency amounts are added as printed";

/// Depreciation and terminal value as the conditions see them; both are
/// absent under an operating lease.
fn lease_benefits(cf: &CashflowSummary, p: &DealParameters) -> (f64, f64) {
    match p.classification {
        LeaseClassification::Capital => (cf.depreciation_pv, cf.terminal_value_pv),
        LeaseClassification::Operating => (0.0, 0.0),
    }
}

/// Conditions B1-B6 under which borrowing beats the sale-leaseback.
pub fn eval_borrow_conditions(
    cf: &CashflowSummary,
    p: &DealParameters,
    curves: &CurveSet,
    opts: &EvalOptions,
) -> Result<Vec<ConditionResult>> {
    use ConditionId::*;
    use Relation::*;

    let dv = Derivatives { curves, step: opts.fd_step };
    let n_sl = net_position_slb(cf, p).value;
    let n_b = net_position_borrow(cf, p).value;
    let (d, _) = lease_benefits(cf, p);
    let r_f = p.firm_borrow_cost;
    let r_ts = p.tax_rate_seller_lessee;
    let r_ltc = p.txn_cost_loan;
    let r_dlev = p.leverage_penalty_rate;
    let dc = p.debt_to_capital;
    let tc = p.total_capital;
    let r_s = p.implicit_lease_rate;
    let r_sl = p.txn_cost_slb;
    let s = p.sale_price;
    let principal = p.loan_principal;

    let b1_lhs = (r_f * (1.0 - r_ts) + r_ltc * principal + r_dlev * dc * tc).max(0.0);
    let b1_rhs = r_s * (1.0 - r_ts) - d * r_ts + r_sl * s;
    let b1 = ConditionResult::new(
        B1,
        vec![Comparison::new(b1_lhs, Less, b1_rhs)],
        &[("R_f", r_f), ("R_ts", r_ts), ("R_ltc", r_ltc), ("P", principal), ("R_dlev", r_dlev), ("DC", dc), ("TC", tc), ("R_s", r_s), ("D", d), ("R_sl", r_sl), ("S", s)],
    )
    .with_note(MIXED_UNITS);

    let b2 = ConditionResult::new(B2, vec![Comparison::new(n_b, Greater, n_sl)], &[("N_b", n_b), ("N_sl", n_sl)]);

    let r_ba = p.borrow_cost_after;
    let r_bb = p.borrow_cost_before;
    let b3_lhs = ((r_ba - r_bb) - r_sl).max(0.0);
    let b3 = ConditionResult::new(
        B3,
        vec![Comparison::new(b3_lhs, Less, r_ltc + r_dlev)],
        &[("R_ba", r_ba), ("R_bb", r_bb), ("R_sl", r_sl), ("R_ltc", r_ltc), ("R_dlev", r_dlev)],
    )
    .with_note("the doubled cost term is read as R_ltc + R_dlev; the alternative reading 2*R_ltc is not evaluated");

    let drf = dv.first(CurveName::FirmBorrowCostOfLeverage, dc)?;
    let ddlev = dv.first(CurveName::LeveragePenaltyOfLeverage, dc)?;
    let b4 = ConditionResult::new(
        B4,
        vec![Comparison::new(drf, Greater, ddlev.max(1.0))],
        &[("dR_f/dDC", drf), ("dR_dlev/dDC", ddlev)],
    );

    let drs = dv.first(CurveName::LeaseRateOfSalePrice, s)?;
    let drf_p = dv.first(CurveName::FirmBorrowCostOfPrincipal, principal)?;
    let b5 = ConditionResult::new(
        B5,
        vec![Comparison::new(drs, Greater, drf_p.max(1.0))],
        &[("dR_s/dS", drs), ("dR_f/dP", drf_p)],
    );

    let b6 = ConditionResult::new(B6, vec![Comparison::new(n_b, Greater, n_sl.max(0.0))], &[("N_b", n_b), ("N_sl", n_sl)]);

    Ok(vec![b1, b2, b3, b4, b5, b6])
}

/// Conditions S1-S7 under which the sale-leaseback beats doing nothing.
pub fn eval_slb_vs_nothing_conditions(
    cf: &CashflowSummary,
    p: &DealParameters,
    curves: &CurveSet,
    opts: &EvalOptions,
) -> Result<Vec<ConditionResult>> {
    use ConditionId::*;
    use CurveName::*;
    use Relation::*;

    let dv = Derivatives { curves, step: opts.fd_step };
    let (_, tv) = lease_benefits(cf, p);
    let s = p.sale_price;
    let l_s = cf.lease_pv;
    let r_sl = p.txn_cost_slb;
    let r_ts = p.tax_rate_seller_lessee;
    let dc = p.debt_to_capital;
    let tc = p.total_capital;
    let p_dss = p.p_bankrupt_slb.value();
    let r_a_rate = dv.curve(LeverageBenefitOfLeverage)?.eval(dc).map_err(|e| annotate(e, LeverageBenefitOfLeverage))?;

    let s1_lhs = s - l_s - r_sl * s - (l_s * r_ts) - (r_a_rate * dc * tc) + tv * (1.0 - p_dss);
    let s1 = ConditionResult::new(
        S1,
        vec![Comparison::new(s1_lhs, Greater, 0.0)],
        &[("S", s), ("L_s", l_s), ("R_sl", r_sl), ("R_ts", r_ts), ("r_a", r_a_rate), ("DC", dc), ("TC", tc), ("TV", tv), ("P_dss", p_dss)],
    )
    .with_note(MIXED_UNITS);

    let drf = dv.first(FirmBorrowCostOfLeverage, dc)?;
    let ddlev = dv.first(LeveragePenaltyOfLeverage, dc)?;
    let s2 = ConditionResult::new(
        S2,
        vec![Comparison::new(drf, Greater, ddlev.max(1.0))],
        &[("dR_f/dDC", drf), ("dR_dlev/dDC", ddlev)],
    );

    let dra = dv.first(LeverageBenefitOfLeverage, dc)?;
    let s3 = ConditionResult::new(
        S3,
        vec![Comparison::new(dra, Greater, ddlev.max(1.0))],
        &[("dr_a/dDC", dra), ("dR_dlev/dDC", ddlev)],
    );

    let r_s = p.implicit_lease_rate;
    let r_bb = p.borrow_cost_before;
    let s4 = ConditionResult::new(
        S4,
        vec![Comparison::new(r_s * r_ts, Less, r_bb * r_ts)],
        &[("R_s", r_s), ("R_bb", r_bb), ("R_ts", r_ts)],
    );

    let dbb1 = dv.first(BorrowCostBeforeOfLeverage, dc)?;
    let dba1 = dv.first(BorrowCostAfterOfLeverage, dc)?;
    let dbb3 = dv.third(BorrowCostBeforeOfLeverage, dc)?;
    let dba3 = dv.third(BorrowCostAfterOfLeverage, dc)?;
    let s5 = ConditionResult::new(
        S5,
        vec![Comparison::new(dbb1, Greater, dba1.max(1.0)), Comparison::new(dbb3, Greater, dba3.max(1.0))],
        &[("dR_bb/dDC", dbb1), ("dR_ba/dDC", dba1), ("d3R_bb/dDC3", dbb3), ("d3R_ba/dDC3", dba3)],
    );

    let dp1 = dv.first(BankruptcySlbOfLeverage, dc)?;
    let dp3 = dv.third(BankruptcySlbOfLeverage, dc)?;
    let s6 = ConditionResult::new(
        S6,
        vec![Comparison::new(dp1.max(1.0), Less, dbb1), Comparison::new(dp3.max(1.0), Less, dbb3)],
        &[("dP_dss/dDC", dp1), ("dR_bb/dDC", dbb1), ("d3P_dss/dDC3", dp3), ("d3R_bb/dDC3", dbb3)],
    );

    let r_f = p.firm_borrow_cost;
    let dpb1 = dv.first(BankruptcySlbOfBorrowCostBefore, r_bb)?;
    let dpf1 = dv.first(BankruptcySlbOfFirmBorrowCost, r_f)?;
    let dpb3 = dv.third(BankruptcySlbOfBorrowCostBefore, r_bb)?;
    let dpf3 = dv.third(BankruptcySlbOfFirmBorrowCost, r_f)?;
    let s7 = ConditionResult::new(
        S7,
        vec![Comparison::new(dpb1.max(1.0), Less, dpf1), Comparison::new(dpb3.max(1.0), Less, dpf3)],
        &[("dP_dss/dR_bb", dpb1), ("dP_dss/dR_f", dpf1), ("d3P_dss/dR_bb3", dpb3), ("d3P_dss/dR_f3", dpf3)],
    );

    Ok(vec![s1, s2, s3, s4, s5, s6, s7])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    Borrow,
    SaleLeaseback,
    NoAction,
    Indeterminate,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Borrow if every B condition holds, else sale-leaseback if every S
/// condition holds, else no action if both net positions are non-positive,
/// else indeterminate. `holds` is indexed like [`ConditionId::ALL`].
pub fn recommendation_rule(holds: &[bool; 13], n_sl: f64, n_b: f64) -> Recommendation {
    let (borrow, slb) = holds.split_at(6);
    if borrow.iter().all(|&h| h) {
        Recommendation::Borrow
    } else if slb.iter().all(|&h| h) {
        Recommendation::SaleLeaseback
    } else if n_sl <= 0.0 && n_b <= 0.0 {
        Recommendation::NoAction
    } else {
        Recommendation::Indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub classification: LeaseClassification,
    pub n_sl: NetPosition,
    pub n_b: NetPosition,
    pub conditions: Vec<ConditionResult>,
    pub recommendation: Recommendation,
    pub failing_conditions: Vec<ConditionId>,
    /// R_ts - R_tb, the viability driver of an operating-lease sale-leaseback.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tax_rate_differential: Option<f64>,
    /// R_a in currency as used in N_sl, beside the rate r_a(DC) used in S1.
    pub leverage_benefit_currency: f64,
    pub leverage_benefit_rate: f64,
    pub symbol_mapping: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

pub fn symbol_mapping() -> BTreeMap<String, String> {
    [
        ("R_r", "R_f (firm borrowing cost)"),
        ("R_i in P(1-R_i) and R_i*P", "R_ltc (loan transaction cost)"),
        ("R_i in R_i*DC*TC and dR_i/dDC", "R_dlev (leverage-driven rate increase)"),
        ("R_i + R_i", "R_ltc + R_dlev"),
        ("R_ab", "R_ba (borrowing cost after)"),
        ("R_a in N_sl", "leverage_benefit (currency)"),
        ("R_a in S1 and dR_a/dDC", "r_a_of_DC curve (rate)"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Assembles the report from evaluated conditions.
pub fn recommend(
    p: &DealParameters,
    n_sl: NetPosition,
    n_b: NetPosition,
    conditions: Vec<ConditionResult>,
    leverage_benefit_rate: f64,
    mut warnings: Vec<String>,
) -> DecisionReport {
    let mut holds = [false; 13];
    for c in &conditions {
        holds[c.id as usize] = c.holds;
    }
    let recommendation = recommendation_rule(&holds, n_sl.value, n_b.value);
    let failing_conditions = conditions.iter().filter(|c| !c.holds).map(|c| c.id).collect();

    let tax_rate_differential = match p.classification {
        LeaseClassification::Operating => {
            let diff = p.tax_rate_seller_lessee - p.tax_rate_buyer_lessor;
            warnings.push(format!(
                "operating lease: viability depends on the seller-lessee / buyer-lessor tax-rate differential ({diff})"
            ));
            if diff == 0.0 {
                warnings.push("no tax-rate differential".to_string());
            }
            Some(diff)
        }
        LeaseClassification::Capital => None,
    };

    DecisionReport {
        classification: p.classification,
        n_sl,
        n_b,
        conditions,
        recommendation,
        failing_conditions,
        tax_rate_differential,
        leverage_benefit_currency: p.leverage_benefit,
        leverage_benefit_rate,
        symbol_mapping: symbol_mapping(),
        warnings,
    }
}

/// Cashflows plus decision report for one deal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cashflows: CashflowSummary,
    pub report: DecisionReport,
}

/// Validates the deal, derives cashflows, and evaluates everything.
pub fn evaluate(p: &DealParameters, curves: &CurveSet, opts: &EvalOptions) -> Result<Evaluation> {
    let findings = p.validate();
    ensure_valid(&findings)?;
    let cashflows = p.derive_cashflows()?;
    let warnings = findings.iter().map(|f| format!("{}: {}", f.path, f.message)).collect();
    let report = evaluate_with_cashflows(&cashflows, p, curves, opts, warnings)?;
    Ok(Evaluation { cashflows, report })
}

/// Evaluation on caller-supplied cashflows, skipping validation.
pub fn evaluate_with_cashflows(
    cf: &CashflowSummary,
    p: &DealParameters,
    curves: &CurveSet,
    opts: &EvalOptions,
    warnings: Vec<String>,
) -> Result<DecisionReport> {
    let mut conditions = eval_borrow_conditions(cf, p, curves, opts)?;
    conditions.extend(eval_slb_vs_nothing_conditions(cf, p, curves, opts)?);
    let leverage_benefit_rate = conditions
        .iter()
        .find(|c| c.id == ConditionId::S1)
        .and_then(|c| c.inputs.get("r_a").copied())
        .unwrap_or(f64::NAN);
    Ok(recommend(
        p,
        net_position_slb(cf, p),
        net_position_borrow(cf, p),
        conditions,
        leverage_benefit_rate,
        warnings,
    ))
}
