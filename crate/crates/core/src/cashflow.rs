//! Time-value-of-money kernels: level annuities, amortization schedules,
//! straight-line depreciation and present values of payment streams.
//!
//! All amounts are plain `f64` currency units. Periods are 1-based months.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scenario-currency amount.
pub type Money = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Monthly,
    Annual,
}

/// A rate quoted per period, as a fraction (0.05 = 5%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePerPeriod {
    pub value: f64,
    pub period: Period,
}

impl RatePerPeriod {
    pub fn monthly(value: f64) -> Self {
        Self { value, period: Period::Monthly }
    }

    pub fn annual(value: f64) -> Self {
        Self { value, period: Period::Annual }
    }

    /// Nominal conversion: an annual rate maps to `annual / 12` per month.
    pub fn to_monthly(self) -> Self {
        match self.period {
            Period::Monthly => self,
            Period::Annual => Self::monthly(self.value / 12.0),
        }
    }

    fn check(self) -> Result<()> {
        if !self.value.is_finite() || self.value <= -1.0 {
            return Err(Error::InvalidInput(format!(
                "rate must be finite and greater than -1, got {}",
                self.value
            )));
        }
        Ok(())
    }

    fn monthly_value(self) -> Result<f64> {
        let monthly = self.to_monthly();
        monthly.check()?;
        Ok(monthly.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmortizationRow {
    pub period_index: u32,
    pub payment: Money,
    pub interest: Money,
    pub principal: Money,
    pub balance_after: Money,
}

/// Ordered `(period_index, amount)` pairs with strictly increasing 1-based indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, Money)>", into = "Vec<(u32, Money)>")]
pub struct PaymentStream(Vec<(u32, Money)>);

impl PaymentStream {
    pub fn new(entries: Vec<(u32, Money)>) -> Result<Self> {
        let mut prev = 0u32;
        for &(idx, amount) in &entries {
            if idx <= prev {
                return Err(Error::InvalidInput(format!(
                    "payment stream indices must be strictly increasing and >= 1 (saw {idx} after {prev})"
                )));
            }
            if !amount.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite amount at period {idx}")));
            }
            prev = idx;
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[(u32, Money)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only periods up to and including `last_period`.
    pub fn truncated(&self, last_period: u32) -> Self {
        Self(self.0.iter().copied().filter(|&(k, _)| k <= last_period).collect())
    }

    pub fn total(&self) -> Money {
        self.0.iter().map(|&(_, a)| a).sum()
    }
}

impl TryFrom<Vec<(u32, Money)>> for PaymentStream {
    type Error = Error;

    fn try_from(entries: Vec<(u32, Money)>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<PaymentStream> for Vec<(u32, Money)> {
    fn from(stream: PaymentStream) -> Self {
        stream.0
    }
}

fn check_loan(principal: Money, rate: f64, n_periods: u32) -> Result<()> {
    if !(principal.is_finite() && principal > 0.0) {
        return Err(Error::InvalidInput(format!("principal must be positive, got {principal}")));
    }
    if n_periods == 0 {
        return Err(Error::InvalidInput("number of periods must be at least 1".into()));
    }
    if rate < 0.0 {
        return Err(Error::InvalidInput(format!("loan rate must be non-negative, got {rate}")));
    }
    Ok(())
}

/// Level payment that retires `principal` in exactly `n_periods` payments.
pub fn annuity_payment(principal: Money, rate: RatePerPeriod, n_periods: u32) -> Result<Money> {
    let r = rate.monthly_value()?;
    check_loan(principal, r, n_periods)?;
    if r == 0.0 {
        return Ok(principal / f64::from(n_periods));
    }
    let growth = (1.0 + r).powi(n_periods as i32);
    Ok(principal * r * growth / (growth - 1.0))
}

/// Level-payment amortization schedule. The final row absorbs rounding so the
/// closing balance is zero.
pub fn amortization_schedule(
    principal: Money,
    rate: RatePerPeriod,
    n_periods: u32,
) -> Result<Vec<AmortizationRow>> {
    let payment = annuity_payment(principal, rate, n_periods)?;
    let r = rate.monthly_value()?;
    let mut balance = principal;
    let mut rows = Vec::with_capacity(n_periods as usize);
    for k in 1..=n_periods {
        let interest = balance * r;
        let (payment, principal_part) = if k == n_periods {
            (balance + interest, balance)
        } else {
            (payment, payment - interest)
        };
        balance -= principal_part;
        if k == n_periods {
            balance = 0.0;
        }
        rows.push(AmortizationRow {
            period_index: k,
            payment,
            interest,
            principal: principal_part,
            balance_after: balance,
        });
    }
    Ok(rows)
}

/// Interest column of a schedule as a payment stream.
pub fn interest_stream(rows: &[AmortizationRow]) -> PaymentStream {
    PaymentStream(rows.iter().map(|r| (r.period_index, r.interest)).collect())
}

/// Present value of `payment` received at the end of each of `n_periods` months.
pub fn pv_level_stream(payment: Money, discount: RatePerPeriod, n_periods: u32) -> Result<Money> {
    let r = discount.monthly_value()?;
    if n_periods == 0 {
        return Err(Error::InvalidInput("number of periods must be at least 1".into()));
    }
    if !payment.is_finite() {
        return Err(Error::InvalidInput(format!("payment must be finite, got {payment}")));
    }
    let n = f64::from(n_periods);
    if r == 0.0 {
        return Ok(payment * n);
    }
    Ok(payment * (1.0 - (1.0 + r).powf(-n)) / r)
}

/// Present value of an arbitrary stream; an empty stream is worth zero.
pub fn pv_stream(stream: &PaymentStream, discount: RatePerPeriod) -> Result<Money> {
    let r = discount.monthly_value()?;
    Ok(stream
        .entries()
        .iter()
        .map(|&(k, amount)| amount / (1.0 + r).powi(k as i32))
        .sum())
}

/// `basis / n_periods` in each of periods `1..=n_periods`.
pub fn straight_line_depreciation(basis: Money, n_periods: u32) -> Result<PaymentStream> {
    if n_periods == 0 {
        return Err(Error::InvalidInput("depreciation life must be at least 1 period".into()));
    }
    if !(basis.is_finite() && basis >= 0.0) {
        return Err(Error::InvalidInput(format!("depreciation basis must be >= 0, got {basis}")));
    }
    let per = basis / f64::from(n_periods);
    Ok(PaymentStream((1..=n_periods).map(|k| (k, per)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Month-by-month oracle: finds the level payment by bisection on the
    /// terminal balance of a literal loop, then replays the loop.
    fn loop_oracle(principal: f64, r: f64, n: u32) -> (f64, f64, f64) {
        let terminal = |pmt: f64| {
            let mut b = principal;
            for _ in 0..n {
                b = b + b * r - pmt;
            }
            b
        };
        let (mut lo, mut hi) = (0.0, principal * (1.0 + r).powi(n as i32) + 1.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if terminal(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let pmt = 0.5 * (lo + hi);
        let mut b = principal;
        let mut total_interest = 0.0;
        for _ in 0..n {
            let i = b * r;
            total_interest += i;
            b = b + i - pmt;
        }
        (pmt, total_interest, b)
    }

    #[test]
    fn annuity_examples() {
        let p = annuity_payment(1_000_000.0, RatePerPeriod::monthly(0.01), 12).unwrap();
        let (oracle, _, _) = loop_oracle(1_000_000.0, 0.01, 12);
        assert_relative_eq!(p, oracle, max_relative = 1e-10);
        assert!((p - 88_848.79).abs() < 0.005);
        assert_eq!(annuity_payment(1_200.0, RatePerPeriod::monthly(0.0), 12).unwrap(), 100.0);
        assert_relative_eq!(
            annuity_payment(100.0, RatePerPeriod::monthly(0.01), 1).unwrap(),
            101.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn annuity_rejects_bad_input() {
        assert!(annuity_payment(0.0, RatePerPeriod::monthly(0.01), 12).is_err());
        assert!(annuity_payment(-5.0, RatePerPeriod::monthly(0.01), 12).is_err());
        assert!(annuity_payment(100.0, RatePerPeriod::monthly(0.01), 0).is_err());
        assert!(annuity_payment(100.0, RatePerPeriod::monthly(-0.01), 12).is_err());
    }

    #[test]
    fn schedule_examples() {
        let rows = amortization_schedule(1_000_000.0, RatePerPeriod::monthly(0.01), 12).unwrap();
        assert_eq!(rows.len(), 12);
        assert_relative_eq!(rows[0].interest, 10_000.0, max_relative = 1e-12);
        let total: f64 = rows.iter().map(|r| r.interest).sum();
        let (_, oracle_total, _) = loop_oracle(1_000_000.0, 0.01, 12);
        assert_relative_eq!(total, oracle_total, max_relative = 1e-9);
        assert!((total - 66_185.46).abs() < 0.005);

        let flat = amortization_schedule(1_200.0, RatePerPeriod::monthly(0.0), 12).unwrap();
        assert!(flat.iter().all(|r| r.interest == 0.0));
        assert!(flat.iter().all(|r| r.payment == 100.0));
    }

    #[test]
    fn annual_rate_converts_nominally() {
        let a = annuity_payment(1_000_000.0, RatePerPeriod::annual(0.12), 12).unwrap();
        let m = annuity_payment(1_000_000.0, RatePerPeriod::monthly(0.01), 12).unwrap();
        assert_relative_eq!(a, m, max_relative = 1e-15);
    }

    #[test]
    fn pv_level_examples() {
        let pv = pv_level_stream(100.0, RatePerPeriod::monthly(0.01), 12).unwrap();
        let term_by_term: f64 = (1..=12).map(|k| 100.0 / 1.01f64.powi(k)).sum();
        assert_relative_eq!(pv, term_by_term, max_relative = 1e-12);
        assert!((pv - 1_125.51).abs() < 0.005);
        assert_eq!(pv_level_stream(100.0, RatePerPeriod::monthly(0.0), 12).unwrap(), 1_200.0);
        assert_eq!(pv_level_stream(0.0, RatePerPeriod::monthly(0.01), 12).unwrap(), 0.0);
        assert!(pv_level_stream(100.0, RatePerPeriod::monthly(-1.0), 12).is_err());
        assert!(pv_level_stream(100.0, RatePerPeriod::monthly(0.01), 0).is_err());
    }

    #[test]
    fn pv_stream_examples() {
        let rows = amortization_schedule(1_000_000.0, RatePerPeriod::monthly(0.01), 12).unwrap();
        let pv = pv_stream(&interest_stream(&rows), RatePerPeriod::monthly(0.0)).unwrap();
        assert!((pv - 66_185.46).abs() < 0.005);

        let one = PaymentStream::new(vec![(1, 100.0)]).unwrap();
        assert_eq!(pv_stream(&one, RatePerPeriod::monthly(0.0)).unwrap(), 100.0);
        assert_relative_eq!(
            pv_stream(&one, RatePerPeriod::monthly(0.01)).unwrap(),
            100.0 / 1.01,
            max_relative = 1e-15
        );
        assert_eq!(pv_stream(&PaymentStream::default(), RatePerPeriod::monthly(0.02)).unwrap(), 0.0);
    }

    #[test]
    fn stream_indices_must_increase() {
        assert!(PaymentStream::new(vec![(0, 1.0)]).is_err());
        assert!(PaymentStream::new(vec![(2, 1.0), (2, 1.0)]).is_err());
        assert!(PaymentStream::new(vec![(3, 1.0), (1, 1.0)]).is_err());
    }

    #[test]
    fn depreciation_examples() {
        let s = straight_line_depreciation(1_200_000.0, 120).unwrap();
        assert_eq!(s.len(), 120);
        assert!(s.entries().iter().all(|&(_, a)| a == 10_000.0));
        assert_eq!(s.entries()[119].0, 120);
        let zeros = straight_line_depreciation(0.0, 12).unwrap();
        assert!(zeros.entries().iter().all(|&(_, a)| a == 0.0));
        assert_relative_eq!(
            pv_stream(&s, RatePerPeriod::monthly(0.0)).unwrap(),
            1_200_000.0,
            max_relative = 1e-12
        );
        assert!(straight_line_depreciation(100.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn amortization_closes(principal in 1e3f64..1e9, rate in 0.0f64..0.03, n in 1u32..=480) {
            let rows = amortization_schedule(principal, RatePerPeriod::monthly(rate), n).unwrap();
            let repaid: f64 = rows.iter().map(|r| r.principal).sum();
            prop_assert!((repaid - principal).abs() <= 1e-6 * principal.max(1.0));
            prop_assert!(rows.last().unwrap().balance_after.abs() < 1e-6);
            for r in &rows {
                prop_assert!((r.payment - (r.interest + r.principal)).abs() <= 1e-9 * r.payment.abs().max(1.0));
                prop_assert!(r.balance_after >= -1e-6);
            }
        }

        #[test]
        fn zero_rate_conserves(payment in 0.0f64..1e7, n in 1u32..600) {
            let pv = pv_level_stream(payment, RatePerPeriod::monthly(0.0), n).unwrap();
            prop_assert!((pv - payment * f64::from(n)).abs() <= 1e-9 * (payment * f64::from(n)).max(1.0));
        }

        #[test]
        fn pv_decreases_in_discount(payment in 1.0f64..1e6, n in 1u32..480, r in 0.0f64..0.05, dr in 1e-4f64..0.05) {
            let a = pv_level_stream(payment, RatePerPeriod::monthly(r), n).unwrap();
            let b = pv_level_stream(payment, RatePerPeriod::monthly(r + dr), n).unwrap();
            prop_assert!(b < a);
        }
    }
}
