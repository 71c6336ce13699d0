//! Asymptotic formulas for `S(x) = Σ_{2≤n≤x} 1/π(n)`, fitting of their
//! additive constants against the exact sum, and error-decay tables.
//!
//! With `L = log x` the expansion evaluated by [`formula8`] is
//!
//! ```text
//! S(x) ≈ ½L² − L − log L + C + Σ_{r=2}^{m} k_r / ((r−1)·L^{r−1}),
//! ```
//!
//! with error `O(L^{−m})`. [`formula12`] is the integral form
//!
//! ```text
//! S(x) ≈ L·log(li x) − ∫_3^x log(li t)/t dt + B.
//! ```
//!
//! Neither `C` nor `B` has a closed form; both are fitted as
//! `S(x) − (formula with constant 0)` and the value at the largest grid point
//! is taken as canonical.

use std::collections::BTreeMap;
use std::fmt;

use crate::constants::KTable;
use crate::error::{Error, Result};
use crate::li::li;
use crate::quadrature::{integrate, QuadOptions, QuadratureResult};
use crate::sieve::{exact_recip_sums, ExactSumResult, SieveConfig};

/// Smallest grid point accepted by the fitting routines.
pub const MIN_FIT_X: u64 = 1_000;

/// Relative tolerance for the integral in [`formula12`].
pub const FORMULA12_REL_TOL: f64 = 1e-11;

/// Decade-ratio threshold for scaled errors.
pub const SCALED_RATIO_LIMIT: f64 = 10.0;

/// `(log x)^{3/5} (log log x)^{−1/5}`.
pub fn delta(x: f64) -> Result<f64> {
    if x.is_nan() || x <= std::f64::consts::E {
        return Err(Error::domain("delta", format!("x = {x} must exceed e")));
    }
    let l = x.ln();
    Ok(l.powf(0.6) * l.ln().powf(-0.2))
}

/// Diagnostic overlay `x·exp(−c_env·δ(x))` for the prime-counting remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEnvelope {
    pub x: f64,
    pub delta: f64,
    pub envelope: f64,
}

pub fn error_envelope(x: f64, c_env: f64) -> Result<ErrorEnvelope> {
    if !(c_env > 0.0 && c_env.is_finite()) {
        return Err(Error::domain("error_envelope", format!("c_env = {c_env} must be positive")));
    }
    let d = delta(x)?;
    Ok(ErrorEnvelope {
        x,
        delta: d,
        envelope: x * (-c_env * d).exp(),
    })
}

/// `½ log² x`.
pub fn formula4(x: f64) -> f64 {
    let l = x.ln();
    0.5 * l * l
}

/// `½ log² x − log x − log log x`.
pub fn formula5(x: f64) -> f64 {
    let l = x.ln();
    0.5 * l * l - l - l.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formula8Eval {
    pub x: f64,
    pub m: usize,
    pub c: f64,
    pub value: f64,
}

pub fn formula8(x: f64, m: usize, c: f64, k: &KTable) -> Result<Formula8Eval> {
    if x.is_nan() || x < 3.0 {
        return Err(Error::domain("formula8", format!("x = {x} < 3")));
    }
    if m < 2 {
        return Err(Error::domain("formula8", format!("m = {m} < 2")));
    }
    k.require("formula8", m)?;
    let l = x.ln();
    let mut value = formula5(x) + c;
    let mut pow = 1.0;
    for r in 2..=m {
        pow *= l;
        value += k.get_f64(r).unwrap() / ((r - 1) as f64 * pow);
    }
    Ok(Formula8Eval { x, m, c, value })
}

/// `∫_3^x log(li t)/t dt`.
pub fn formula12_integral(x: f64) -> Result<QuadratureResult> {
    if x.is_nan() || x <= 3.0 {
        return Err(Error::domain("formula12", format!("x = {x} must exceed 3")));
    }
    let f = |t: f64| match li(t) {
        Ok(r) => r.value.ln() / t,
        Err(_) => f64::NAN,
    };
    integrate(f, 3.0, x, QuadOptions { abs_tol: 1e-14, ..QuadOptions::rel(FORMULA12_REL_TOL) })
        .map_err(|e| Error::numeric("formula12", format!("x = {x}: {e}")))
}

/// `log x · log(li x) − ∫_3^x log(li t)/t dt + B`.
pub fn formula12(x: f64, b: f64) -> Result<f64> {
    let integral = formula12_integral(x)?;
    let lix = li(x)?.value;
    Ok(x.ln() * lix.ln() - integral.value + b)
}

/// Source of exact values of `S(x)`.
pub trait RecipSumOracle {
    fn recip_sum(&self, x: u64) -> Result<f64>;
}

impl<F: Fn(u64) -> Result<f64>> RecipSumOracle for F {
    fn recip_sum(&self, x: u64) -> Result<f64> {
        self(x)
    }
}

/// `S(x)` precomputed at a fixed set of points by one sieve pass.
#[derive(Debug, Clone, Default)]
pub struct TabulatedOracle {
    values: BTreeMap<u64, ExactSumResult>,
}

impl TabulatedOracle {
    pub fn from_sieve(xs: &[u64], cfg: &SieveConfig) -> Result<Self> {
        let results = exact_recip_sums(xs, cfg)?;
        Ok(TabulatedOracle {
            values: results.into_iter().map(|r| (r.x, r)).collect(),
        })
    }

    pub fn get(&self, x: u64) -> Option<&ExactSumResult> {
        self.values.get(&x)
    }

    pub fn points(&self) -> impl Iterator<Item = &ExactSumResult> {
        self.values.values()
    }
}

impl RecipSumOracle for TabulatedOracle {
    fn recip_sum(&self, x: u64) -> Result<f64> {
        self.values.get(&x).map(|r| r.value).ok_or_else(|| {
            Error::domain("oracle", format!("S({x}) was not tabulated"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantName {
    C,
    B,
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstantName::C => "C",
            ConstantName::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub constant_name: ConstantName,
    /// Truncation order for `C`; `None` for `B`.
    pub m: Option<usize>,
    /// `(x, estimate)` for every grid point, ascending.
    pub samples: Vec<(u64, f64)>,
    /// Estimate at the largest grid point.
    pub central_value: f64,
    /// `max − min` over the retained samples.
    pub spread: f64,
    pub tolerance: f64,
    pub stabilized: bool,
}

impl FitReport {
    /// The upper half of the grid, `⌈n/2⌉` points, over which the spread is
    /// measured.
    pub fn retained(&self) -> &[(u64, f64)] {
        let n = self.samples.len();
        &self.samples[n / 2..]
    }

    pub fn anchor_x(&self) -> u64 {
        self.samples.last().expect("fit reports hold at least three samples").0
    }

    pub fn estimate_at(&self, x: u64) -> Option<f64> {
        self.samples.iter().find(|s| s.0 == x).map(|s| s.1)
    }
}

fn check_grid(op: &'static str, grid: &[u64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::domain(op, format!("grid needs at least 3 points, got {}", grid.len())));
    }
    if grid[0] < MIN_FIT_X {
        return Err(Error::domain(op, format!("grid point {} < {MIN_FIT_X}", grid[0])));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(op, "grid must be strictly ascending"));
    }
    Ok(())
}

fn build_report(
    constant_name: ConstantName,
    m: Option<usize>,
    samples: Vec<(u64, f64)>,
    tolerance: f64,
) -> FitReport {
    let central_value = samples.last().unwrap().1;
    let mut report = FitReport {
        constant_name,
        m,
        samples,
        central_value,
        spread: 0.0,
        tolerance,
        stabilized: false,
    };
    let retained = report.retained();
    let max = retained.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let min = retained.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    report.spread = max - min;
    report.stabilized = report.spread <= tolerance;
    report
}

/// Estimates `C` as `S(x) − formula8(x, m, 0)` on every grid point.
pub fn fit_c(
    grid: &[u64],
    m: usize,
    k: &KTable,
    oracle: &impl RecipSumOracle,
    tolerance: f64,
) -> Result<FitReport> {
    check_grid("fit_C", grid)?;
    if m < 2 {
        return Err(Error::domain("fit_C", format!("m = {m} < 2")));
    }
    let samples = grid
        .iter()
        .map(|&x| {
            let exact = oracle.recip_sum(x)?;
            let approx = formula8(x as f64, m, 0.0, k)?.value;
            Ok((x, exact - approx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(build_report(ConstantName::C, Some(m), samples, tolerance))
}

/// Estimates `B` as `S(x) − formula12(x, 0)` on every grid point.
pub fn fit_b(grid: &[u64], oracle: &impl RecipSumOracle, tolerance: f64) -> Result<FitReport> {
    check_grid("fit_B", grid)?;
    let samples = grid
        .iter()
        .map(|&x| {
            let exact = oracle.recip_sum(x)?;
            Ok((x, exact - formula12(x as f64, 0.0)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(build_report(ConstantName::B, None, samples, tolerance))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorRow {
    pub x: u64,
    pub exact: f64,
    pub approx: f64,
    pub diff: f64,
    pub scaled_diff: f64,
}

/// `exact − formula8(x, m, C)` and its `log^m x` scaling at every grid point.
pub fn error_table(
    grid: &[u64],
    m: usize,
    c: f64,
    k: &KTable,
    oracle: &impl RecipSumOracle,
) -> Result<Vec<ErrorRow>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("error_table", "grid must be strictly ascending"));
    }
    if m < 2 {
        return Err(Error::domain("error_table", format!("m = {m} < 2")));
    }
    grid.iter()
        .map(|&x| {
            let exact = oracle.recip_sum(x)?;
            let approx = formula8(x as f64, m, c, k)?.value;
            let diff = exact - approx;
            Ok(ErrorRow {
                x,
                exact,
                approx,
                diff,
                scaled_diff: diff * (x as f64).ln().powi(m as i32),
            })
        })
        .collect()
}

/// `max |scaled_diff| / min |scaled_diff|` over the rows, skipping `skip_x`
/// (the fit anchor, whose residual vanishes by construction). `None` when
/// fewer than two rows remain or a remaining residual is exactly zero.
pub fn scaled_ratio(rows: &[ErrorRow], skip_x: Option<u64>) -> Option<f64> {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| Some(r.x) != skip_x)
        .map(|r| r.scaled_diff.abs())
        .collect();
    if vals.len() < 2 {
        return None;
    }
    let max = vals.iter().copied().fold(0.0, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    (min > 0.0).then(|| max / min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::k_constants;

    #[test]
    fn delta_values() {
        let ee = std::f64::consts::E.exp();
        assert!((delta(ee).unwrap() - 0.6f64.exp()).abs() < 1e-14);
        assert!(delta(1e6).unwrap() < delta(1e7).unwrap());
        let d = delta(1e12).unwrap();
        assert!(((d - 5.762_863_119_612_230_3) / d).abs() < 1e-12);
        assert!(delta(std::f64::consts::E).is_err());
        assert!(delta(2.0).is_err());
    }

    #[test]
    fn envelope_shape() {
        let e = error_envelope(1e6, 1.0).unwrap();
        assert!((e.delta - 3.984_447_438_335_000_5).abs() < 1e-12);
        assert!((e.envelope - 1e6 * (-e.delta).exp()).abs() < 1e-6);
        assert!(error_envelope(1e6, 0.0).is_err());
    }

    #[test]
    fn formula8_direct_substitution() {
        let k = k_constants(5).unwrap();
        let e = std::f64::consts::E;
        let x = e.exp();
        let got = formula8(x, 2, 0.0, &k).unwrap().value;
        let want = 0.5 * e * e - e - 1.0 + 3.0 / e;
        assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        assert!(formula8(2.9, 2, 0.0, &k).is_err());
        assert!(formula8(10.0, 1, 0.0, &k).is_err());
        assert!(formula8(10.0, 6, 0.0, &k).is_err());
    }

    #[test]
    fn formula12_at_lower_end() {
        let x = 3.0 + 1e-9;
        let v = formula12(x, 0.0).unwrap();
        assert!((v - 0.122_958_093_347_025_08).abs() < 1e-8, "{v}");
        assert!(formula12(3.0, 0.0).is_err());
    }

    #[test]
    fn fit_rejects_short_or_unsorted_grids() {
        let k = k_constants(3).unwrap();
        let oracle = |_x: u64| -> Result<f64> { Ok(0.0) };
        assert!(fit_c(&[1000, 2000], 2, &k, &oracle, 1.0).is_err());
        assert!(fit_c(&[1000, 3000, 2000], 2, &k, &oracle, 1.0).is_err());
        assert!(fit_c(&[999, 2000, 3000], 2, &k, &oracle, 1.0).is_err());
        assert!(fit_b(&[10_000], &oracle, 1.0).is_err());
    }

    #[test]
    fn retained_half_and_spread() {
        let samples = vec![(1000, 1.0), (2000, 5.0), (3000, 2.0), (4000, 2.5), (5000, 3.0)];
        let r = build_report(ConstantName::C, Some(2), samples, 1.0);
        assert_eq!(r.retained().len(), 3);
        assert_eq!(r.spread, 1.0);
        assert!(r.stabilized);
        assert_eq!(r.central_value, 3.0);
    }

    #[test]
    fn scaled_ratio_skips_anchor() {
        let row = |x, s| ErrorRow { x, exact: 0.0, approx: 0.0, diff: 0.0, scaled_diff: s };
        let rows = [row(1, 4.0), row(2, -2.0), row(3, 0.0)];
        assert_eq!(scaled_ratio(&rows, Some(3)), Some(2.0));
        assert_eq!(scaled_ratio(&rows, None), None);
        assert_eq!(scaled_ratio(&rows[..1], None), None);
    }
}
