//! Sampled univariate curves (credit curves, bankruptcy-probability curves)
//! and central-difference derivatives evaluated on their interpolants.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed set of curves the derivative conditions can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CurveName {
    #[serde(rename = "R_bb_of_DC")]
    BorrowCostBeforeOfLeverage,
    #[serde(rename = "R_ba_of_DC")]
    BorrowCostAfterOfLeverage,
    #[serde(rename = "R_f_of_DC")]
    FirmBorrowCostOfLeverage,
    #[serde(rename = "R_dlev_of_DC")]
    LeveragePenaltyOfLeverage,
    #[serde(rename = "r_a_of_DC")]
    LeverageBenefitOfLeverage,
    #[serde(rename = "P_dss_of_DC")]
    BankruptcySlbOfLeverage,
    #[serde(rename = "P_dss_of_Rbb")]
    BankruptcySlbOfBorrowCostBefore,
    #[serde(rename = "P_dss_of_Rf")]
    BankruptcySlbOfFirmBorrowCost,
    #[serde(rename = "R_s_of_S")]
    LeaseRateOfSalePrice,
    #[serde(rename = "R_f_of_P")]
    FirmBorrowCostOfPrincipal,
}

impl CurveName {
    pub const ALL: [CurveName; 10] = [
        CurveName::BorrowCostBeforeOfLeverage,
        CurveName::BorrowCostAfterOfLeverage,
        CurveName::FirmBorrowCostOfLeverage,
        CurveName::LeveragePenaltyOfLeverage,
        CurveName::LeverageBenefitOfLeverage,
        CurveName::BankruptcySlbOfLeverage,
        CurveName::BankruptcySlbOfBorrowCostBefore,
        CurveName::BankruptcySlbOfFirmBorrowCost,
        CurveName::LeaseRateOfSalePrice,
        CurveName::FirmBorrowCostOfPrincipal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveName::BorrowCostBeforeOfLeverage => "R_bb_of_DC",
            CurveName::BorrowCostAfterOfLeverage => "R_ba_of_DC",
            CurveName::FirmBorrowCostOfLeverage => "R_f_of_DC",
            CurveName::LeveragePenaltyOfLeverage => "R_dlev_of_DC",
            CurveName::LeverageBenefitOfLeverage => "r_a_of_DC",
            CurveName::BankruptcySlbOfLeverage => "P_dss_of_DC",
            CurveName::BankruptcySlbOfBorrowCostBefore => "P_dss_of_Rbb",
            CurveName::BankruptcySlbOfFirmBorrowCost => "P_dss_of_Rf",
            CurveName::LeaseRateOfSalePrice => "R_s_of_S",
            CurveName::FirmBorrowCostOfPrincipal => "R_f_of_P",
        }
    }
}

impl fmt::Display for CurveName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    #[serde(default)]
    interpolation: Interpolation,
}

/// A function known only at grid points, interpolated linearly or by a
/// not-a-knot cubic spline (which reproduces any cubic polynomial exactly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct SampledCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    interpolation: Interpolation,
    /// Second derivatives at the knots; zeros for linear curves.
    second: Vec<f64>,
}

impl TryFrom<RawCurve> for SampledCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        SampledCurve::new(raw.xs, raw.ys, raw.interpolation)
    }
}

impl From<SampledCurve> for RawCurve {
    fn from(c: SampledCurve) -> Self {
        RawCurve { xs: c.xs, ys: c.ys, interpolation: c.interpolation }
    }
}

impl SampledCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidInput(format!(
                "curve has {} xs but {} ys",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("curve needs at least 2 samples".into()));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("curve samples must be finite".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("curve xs must be strictly increasing".into()));
        }
        let second = match interpolation {
            Interpolation::Linear => vec![0.0; xs.len()],
            Interpolation::Cubic => not_a_knot_second_derivatives(&xs, &ys),
        };
        Ok(Self { xs, ys, interpolation, second })
    }

    /// Samples `f` on `n` evenly spaced points of `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, interpolation: Interpolation, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("curve needs at least 2 samples".into()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
            .collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys, interpolation)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn default_step(&self) -> f64 {
        let (lo, hi) = self.domain();
        (hi - lo) / 1000.0
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            let (lo, hi) = self.domain();
            return Err(Error::Domain(format!("x = {x} outside curve domain [{lo}, {hi}]")));
        }
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let linear = y0 + t * (y1 - y0);
        match self.interpolation {
            Interpolation::Linear => Ok(linear),
            Interpolation::Cubic => {
                let (m0, m1) = (self.second[i], self.second[i + 1]);
                let u = 1.0 - t;
                Ok(linear - u * t * h * h / 6.0 * ((1.0 + u) * m0 + (1.0 + t) * m1))
            }
        }
    }
}

/// Knot second derivatives of the not-a-knot spline. Falls back to the
/// interpolating parabola for three points and a line for two.
fn not_a_knot_second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    match n {
        2 => return vec![0.0; 2],
        3 => {
            let d0 = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            let d1 = (ys[2] - ys[1]) / (xs[2] - xs[1]);
            let m = 2.0 * (d1 - d0) / (xs[2] - xs[0]);
            return vec![m; 3];
        }
        _ => {}
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

    // Interior rows i = 1..=n-2 with M_0 and M_{n-1} eliminated through the
    // not-a-knot conditions at x_1 and x_{n-2}.
    let m = n - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for row in 0..m {
        let i = row + 1;
        sub[row] = h[i - 1];
        diag[row] = 2.0 * (h[i - 1] + h[i]);
        sup[row] = h[i];
        rhs[row] = 6.0 * (slope[i] - slope[i - 1]);
    }
    let (h0, h1) = (h[0], h[1]);
    diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
    sup[0] = (h1 * h1 - h0 * h0) / h1;
    let (a, b) = (h[n - 3], h[n - 2]);
    sub[m - 1] = (a * a - b * b) / a;
    diag[m - 1] = (a + b) * (2.0 * a + b) / a;
    if m == 2 {
        // n = 4: both boundary reductions land on the same 2x2 system.
        diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        sup[0] = (h1 * h1 - h0 * h0) / h1;
    }

    let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let mut second = vec![0.0; n];
    second[1..n - 1].copy_from_slice(&interior);
    second[0] = ((h0 + h1) * second[1] - h0 * second[2]) / h1;
    second[n - 1] = ((a + b) * second[n - 2] - b * second[n - 3]) / a;
    second
}

/// Thomas algorithm. `sub[0]` and `sup[last]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Central first difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central third difference `(f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)) / 2h^3`.
pub fn central_d3(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
}

fn check_step(curve: &SampledCurve, x: f64, reach: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    if !(curve.contains(x - reach) && curve.contains(x + reach)) {
        let (lo, hi) = curve.domain();
        return Err(Error::Domain(format!(
            "stencil [{}, {}] around x = {x} leaves curve domain [{lo}, {hi}]",
            x - reach,
            x + reach
        )));
    }
    Ok(())
}

/// First derivative of the interpolant at `x`.
pub fn d1(curve: &SampledCurve, x: f64, h: f64) -> Result<f64> {
    check_step(curve, x, h, h)?;
    let f = |t: f64| curve.eval(t).expect("stencil points checked against domain");
    Ok(central_d1(f, x, h))
}

/// Third derivative of the interpolant at `x`. Needs a cubic curve with at
/// least five samples.
pub fn d3(curve: &SampledCurve, x: f64, h: f64) -> Result<f64> {
    if curve.interpolation != Interpolation::Cubic {
        return Err(Error::Capability("third derivative requires cubic curve".into()));
    }
    if curve.xs.len() < 5 {
        return Err(Error::Capability(format!(
            "third derivative requires at least 5 samples, curve has {}",
            curve.xs.len()
        )));
    }
    check_step(curve, x, 2.0 * h, h)?;
    let f = |t: f64| curve.eval(t).expect("stencil points checked against domain");
    Ok(central_d3(f, x, h))
}

/// Named curves supplied with a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, SampledCurve>", into = "BTreeMap<String, SampledCurve>")]
pub struct CurveSet(pub BTreeMap<CurveName, SampledCurve>);

impl From<CurveSet> for BTreeMap<String, SampledCurve> {
    fn from(set: CurveSet) -> Self {
        set.0.into_iter().map(|(k, v)| (k.as_str().to_string(), v)).collect()
    }
}

impl TryFrom<BTreeMap<String, SampledCurve>> for CurveSet {
    type Error = Error;

    fn try_from(raw: BTreeMap<String, SampledCurve>) -> Result<Self> {
        raw.into_iter()
            .map(|(key, curve)| {
                CurveName::ALL
                    .into_iter()
                    .find(|n| n.as_str() == key)
                    .map(|n| (n, curve))
                    .ok_or_else(|| {
                        let known: Vec<_> = CurveName::ALL.iter().map(|n| n.as_str()).collect();
                        Error::InvalidInput(format!("unknown curve `{key}`, expected one of {}", known.join(", ")))
                    })
            })
            .collect::<Result<_>>()
            .map(CurveSet)
    }
}

impl CurveSet {
    pub fn get(&self, name: CurveName) -> Result<&SampledCurve> {
        self.0.get(&name).ok_or_else(|| Error::MissingCurve(name.as_str().to_string()))
    }

    pub fn insert(&mut self, name: CurveName, curve: SampledCurve) {
        self.0.insert(name, curve);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
