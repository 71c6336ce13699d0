//! The offset logarithmic integral `li x = ∫_2^x dt / log t` and its
//! truncated asymptotic expansions.
//!
//! [`li`] goes through the exponential integral: with `L = log x` and
//! `L₂ = log 2`,
//!
//! ```text
//! li x = Ei(L) − Ei(L₂) = log(L / L₂) + Σ_{k≥1} (L^k − L₂^k) / (k·k!)
//! ```
//!
//! for `L ≤ 40`, and the asymptotic series of `Ei` beyond. [`li_quadrature`]
//! integrates `1/log t` directly and serves as the independent cross-check.

use crate::compensated::{CompensatedSum, UNIT_ROUNDOFF};
use crate::constants::KTable;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

pub use crate::quadrature::QuadratureResult;

/// Above this value of `log x` the power series is replaced by the
/// asymptotic series of `Ei`.
pub const SERIES_MAX_LOG: f64 = 40.0;

/// `Ei(log 2)`, i.e. the principal-value logarithmic integral at 2.
const EI_LOG2: f64 = 1.045_163_780_117_492_8;

/// Value of a truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionEval {
    pub x: f64,
    pub m: usize,
    pub value: f64,
    /// `|final retained term|`.
    pub last_term_magnitude: f64,
}

fn check_li_domain(op: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 2.0 {
        return Err(Error::domain(op, format!("x = {x} < 2")));
    }
    if x.is_infinite() {
        return Err(Error::domain(op, "x must be finite"));
    }
    Ok(())
}

fn li_series(x: f64) -> QuadratureResult {
    let l = x.ln();
    let l2 = std::f64::consts::LN_2;
    let mut sum = CompensatedSum::new();
    sum.add((l / l2).ln());
    let mut p = 1.0; // L^k / k!
    let mut q = 1.0; // L₂^k / k!
    let mut rounding = 0.0;
    let mut k = 1u32;
    loop {
        let kf = k as f64;
        p *= l / kf;
        q *= l2 / kf;
        let term = (p - q) / kf;
        sum.add(term);
        rounding += (2.0 * kf + 4.0) * UNIT_ROUNDOFF * term.abs();
        // Terms decrease geometrically once k > L; the tail after a term t
        // is below t·(L/(k+1))/(1 − L/(k+1)).
        if kf > 2.0 * l && term <= 1e-18 * sum.value().abs() {
            let ratio = l / (kf + 1.0);
            rounding += term * ratio / (1.0 - ratio);
            break;
        }
        if term == 0.0 && kf > l {
            break;
        }
        k += 1;
    }
    let value = sum.value();
    // d(li)/dL = x / L · L… the rounding of L itself shifts the result by ≈ x·u.
    let log_rounding = x * UNIT_ROUNDOFF;
    QuadratureResult {
        value,
        abs_err_estimate: rounding + sum.error_bound() + log_rounding,
    }
}

fn li_asymptotic(x: f64) -> QuadratureResult {
    let l = x.ln();
    // Ei(L) ~ e^L / L · Σ k!/L^k, truncated before the smallest term.
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    let mut k = 0u32;
    let mut smallest;
    loop {
        sum.add(term);
        let next = term * (k as f64 + 1.0) / l;
        smallest = next;
        if next >= term || next < 1e-18 {
            break;
        }
        term = next;
        k += 1;
    }
    let scale = x / l;
    let value = scale * sum.value() - EI_LOG2;
    let abs_err = scale * (smallest + 4.0 * UNIT_ROUNDOFF * sum.value()) + x * UNIT_ROUNDOFF;
    QuadratureResult {
        value,
        abs_err_estimate: abs_err,
    }
}

/// `li x = ∫_2^x dt/log t` through the exponential integral.
pub fn li(x: f64) -> Result<QuadratureResult> {
    check_li_domain("li", x)?;
    if x == 2.0 {
        return Ok(QuadratureResult { value: 0.0, abs_err_estimate: 0.0 });
    }
    if x.ln() <= SERIES_MAX_LOG {
        Ok(li_series(x))
    } else {
        Ok(li_asymptotic(x))
    }
}

/// `li x` by adaptive quadrature of `1/log t` over `[2, x]`.
pub fn li_quadrature(x: f64) -> Result<QuadratureResult> {
    check_li_domain("li_quadrature", x)?;
    integrate(|t: f64| 1.0 / t.ln(), 2.0, x, QuadOptions::default())
}

/// `x · Σ_{r=0}^{m} r! / log^{r+1} x`.
pub fn li_expansion(x: f64, m: usize) -> Result<ExpansionEval> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::domain("li_expansion", format!("x = {x} must exceed 1")));
    }
    let l = x.ln();
    let mut term = 1.0 / l; // r!/L^{r+1} at r = 0
    let mut sum = 0.0;
    for r in 0..=m {
        if r > 0 {
            term *= r as f64 / l;
        }
        sum += term;
    }
    Ok(ExpansionEval {
        x,
        m,
        value: x * sum,
        last_term_magnitude: (x * term).abs(),
    })
}

/// `(1/x)(log x − 1 − Σ_{r=1}^{m} k_r / log^r x)`, the expansion of `1/li x`
/// with its `α_m` remainder dropped.
pub fn recip_li_expansion(x: f64, m: usize, k: &KTable) -> Result<ExpansionEval> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::domain(
            "recip_li_expansion",
            format!("x = {x} must exceed 1"),
        ));
    }
    if m < 1 {
        return Err(Error::domain("recip_li_expansion", "m must be at least 1"));
    }
    k.require("recip_li_expansion", m)?;
    let l = x.ln();
    let mut sum = l - 1.0;
    let mut pow = 1.0;
    let mut last = 0.0;
    for r in 1..=m {
        pow *= l;
        let kr = k.get_f64(r).unwrap_or(f64::INFINITY);
        last = kr / pow;
        sum -= last;
    }
    Ok(ExpansionEval {
        x,
        m,
        value: sum / x,
        last_term_magnitude: (last / x).abs(),
    })
}
