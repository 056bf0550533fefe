//! Independent reference computations for the acceptance suite.
//!
//! Present values come from explicit month loops; the level payment is found
//! by bisecting the loop's terminal balance rather than by the annuity
//! formula. Net positions are literal substitutions with no regrouping.

#![allow(dead_code)]

use slb_core::deal::{DealParameters, LeaseClassification};

pub struct Pv {
    pub lease: f64,
    pub interest: f64,
    pub depreciation: f64,
    pub terminal: f64,
}

pub fn terminal_balance(principal: f64, r: f64, n: u32, pmt: f64) -> f64 {
    let mut b = principal;
    for _ in 0..n {
        b = b + b * r - pmt;
    }
    b
}

/// Payment that drives the month loop's terminal balance to zero.
pub fn level_payment(principal: f64, r: f64, n: u32) -> f64 {
    let (mut lo, mut hi) = (0.0, principal * (1.0 + r).powi(n as i32) + 1.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if terminal_balance(principal, r, n, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(interest, principal, balance_after)` per month.
pub fn schedule(principal: f64, r: f64, n: u32) -> Vec<(f64, f64, f64)> {
    let pmt = level_payment(principal, r, n);
    let mut b = principal;
    (0..n)
        .map(|_| {
            let interest = b * r;
            let paid = pmt - interest;
            b -= paid;
            (interest, paid, b)
        })
        .collect()
}

pub fn present_values(d: &DealParameters) -> Pv {
    let term = d.term_months;
    let disc = d.discount_rate.unwrap_or(d.borrow_cost_after) / 12.0;
    let basis = d.depreciation_basis.unwrap_or(d.sale_price);
    let life = d.depreciation_life_months.unwrap_or(term);

    let mut factor = 1.0;
    let mut factors = Vec::with_capacity(term as usize);
    for _ in 0..term {
        factor /= 1.0 + disc;
        factors.push(factor);
    }

    let lease = factors.iter().map(|f| d.monthly_rent * f).sum();
    let r = d.firm_borrow_cost / 12.0;
    let interest = schedule(d.loan_principal, r, term).iter().zip(&factors).map(|((i, _, _), f)| i * f).sum();
    let depreciation = factors.iter().take(life.min(term) as usize).map(|f| basis / f64::from(life) * f).sum();
    Pv { lease, interest, depreciation, terminal: d.terminal_value_pv }
}

pub fn n_sl_with(d: &DealParameters, pv: &Pv) -> f64 {
    let s = d.sale_price;
    let r_sl = d.txn_cost_slb;
    let r_ts = d.tax_rate_seller_lessee;
    let p_t = d.p_taxable_income.0;
    let r_a = d.leverage_benefit;
    let p_dss = d.p_bankrupt_slb.0;
    let (l_s, dep, tv) = (pv.lease, pv.depreciation, pv.terminal);
    match d.classification {
        LeaseClassification::Capital => {
            s * (1.0 - r_sl) + ((l_s * r_ts) + (dep * r_ts * p_t) - l_s + r_a + tv) * (1.0 - p_dss)
        }
        LeaseClassification::Operating => s * (1.0 - r_sl) + ((l_s * r_ts) - l_s + r_a) * (1.0 - p_dss),
    }
}

pub fn n_b_with(d: &DealParameters, pv: &Pv) -> f64 {
    let p = d.loan_principal;
    let r_ltc = d.txn_cost_loan;
    let r_ts = d.tax_rate_seller_lessee;
    let r_dlev = d.leverage_penalty_rate;
    let dc = d.debt_to_capital;
    let tc = d.total_capital;
    let p_dsb = d.p_bankrupt_borrow.0;
    let i = pv.interest;
    p * (1.0 - r_ltc) + ((i * r_ts) - (r_dlev * dc * tc) + (r_ts * r_dlev * dc * tc) - i * (1.0 - r_ts)) * (1.0 - p_dsb)
}

pub fn net_positions(d: &DealParameters) -> (f64, f64) {
    let pv = present_values(d);
    (n_sl_with(d, &pv), n_b_with(d, &pv))
}

/// The decision rule written out directly from its statement.
pub fn rule(holds: &[bool; 13], n_sl: f64, n_b: f64) -> &'static str {
    if holds[..6].iter().all(|h| *h) {
        "Borrow"
    } else if holds[6..].iter().all(|h| *h) {
        "SaleLeaseback"
    } else if n_sl <= 0.0 && n_b <= 0.0 {
        "NoAction"
    } else {
        "Indeterminate"
    }
}
