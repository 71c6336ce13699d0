//! Compensated floating-point accumulation.
//!
//! [`CompensatedSum`] keeps the running sum as an unevaluated pair
//! `hi + lo`. Every addition splits the exact result of `hi + term` into the
//! rounded sum and its rounding residual (Knuth's TwoSum), so the only error
//! left is the plain accumulation of residuals into `lo`. For `N` additions of
//! nonnegative terms with total `S` that error is at most `γ_N · u · N · S`,
//! which stays far below one ulp of `S` for any `N` reachable in practice.

use std::ops::AddAssign;

/// Unit roundoff of binary64, 2^-53.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Error-free transformation: returns `(s, e)` with `s = fl(a + b)` and
/// `a + b = s + e` exactly.
#[inline(always)]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `γ_n = n·u / (1 − n·u)`, the classical bound factor for `n` roundings.
pub fn gamma(n: u64) -> f64 {
    let nu = n as f64 * UNIT_ROUNDOFF;
    if nu >= 1.0 {
        f64::INFINITY
    } else {
        nu / (1.0 - nu)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    hi: f64,
    lo: f64,
    /// Number of compensated additions performed (terms plus merges).
    adds: u64,
    /// Running sum of absolute values of the inputs, for the error bound.
    abs_total: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, term: f64) {
        let (s, e) = two_sum(self.hi, term);
        self.hi = s;
        self.lo += e;
        self.adds += 1;
        self.abs_total += term.abs();
    }

    /// Appends another accumulator. Merging in a fixed order keeps the result
    /// reproducible independently of how the partial sums were produced.
    pub fn merge(&mut self, other: &CompensatedSum) {
        let (s, e) = two_sum(self.hi, other.hi);
        self.hi = s;
        self.lo += e + other.lo;
        self.adds += other.adds + 1;
        self.abs_total += other.abs_total;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn count(&self) -> u64 {
        self.adds
    }

    /// Upper bound on `|value() − Σ terms|` where the terms are taken as the
    /// exact binary64 inputs.
    pub fn error_bound(&self) -> f64 {
        let n = self.adds.max(1);
        let residuals = UNIT_ROUNDOFF * n as f64 * self.abs_total;
        UNIT_ROUNDOFF * self.value().abs() + gamma(n + 1) * residuals
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for t in iter {
            acc.add(t);
        }
        acc
    }
}
