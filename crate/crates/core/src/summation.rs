//! First-order Euler–Maclaurin summation and the harmonic-type auxiliary sums
//! `Σ_{3≤n≤x} f(n)` for `f ∈ {log t/t, 1/t, k_1/(t log t), k_r/(t log^r t)}`.
//!
//! The Euler–Maclaurin tool uses
//!
//! ```text
//! Σ_{X<n≤Y} f(n) = ∫_X^Y f − ψ(Y)f(Y) + ψ(X)f(X) + ∫_X^Y ψ(t) f'(t) dt,
//! ψ(x) = x − ⌊x⌋ − ½.
//! ```
//!
//! `ψ` jumps at every integer, so the last integral is taken cell by cell
//! over unit intervals where `ψ` is linear.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::compensated::CompensatedSum;
use crate::constants::KTable;
use crate::error::{Error, Result};
use crate::quadrature::{gk15, integrate, QuadOptions};

/// Largest `x` handled by direct summation in [`aux_sum`].
pub const DIRECT_CUTOFF: u64 = 100_000_000;

/// Unit cells integrated explicitly in [`euler_maclaurin_sum`]; the `ψ f'`
/// integral over any remaining tail is bounded instead of computed.
pub const MAX_CELLS: u64 = 1 << 20;

/// Terms per block of direct summation; fixed so results do not depend on
/// the thread count.
const DIRECT_BLOCK: u64 = 1 << 20;

/// `x − ⌊x⌋ − ½`, with range `[−½, ½)`.
pub fn psi(x: f64) -> f64 {
    x - x.floor() - 0.5
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerMaclaurinResult {
    pub value: f64,
    pub abs_err_estimate: f64,
    /// Unit cells whose `ψ f'` integral was evaluated by quadrature.
    pub cells: u64,
    /// Bound used in place of the `ψ f'` integral beyond [`MAX_CELLS`]
    /// (zero when every cell was integrated).
    pub tail_bound: f64,
}

/// `∫_X^Y ψ f'` split at the integers.
fn psi_integral<D: Fn(f64) -> f64>(f_deriv: &D, x0: f64, y: f64) -> Result<EulerMaclaurinResult> {
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    let mut a = x0;
    let mut cells = 0u64;
    while a < y && cells < MAX_CELLS {
        let base = a.floor();
        let b = (base + 1.0).min(y);
        let g = |t: f64| (t - base - 0.5) * f_deriv(t);
        let panel = gk15(&g, a, b);
        // ψ changes sign inside each cell, so the tolerance is relative to ∫|g|.
        let cell_tol = 1e-13 * panel.abs_value;
        let (v, e) = if panel.err <= cell_tol {
            (panel.value, panel.err)
        } else {
            let opts = QuadOptions { abs_tol: cell_tol, ..QuadOptions::rel(0.0) };
            let r = integrate(g, a, b, opts)?;
            (r.value, r.abs_err_estimate)
        };
        acc.add(v);
        err += e;
        cells += 1;
        a = b;
    }
    let mut tail_bound = 0.0;
    if a < y {
        // On each unit cell ∫ψ g = −∫P₂ g' with |P₂| ≤ 1/8, so the tail is
        // bounded by the total variation of f' over [a, y] divided by 8.
        // The variation is sampled on a geometric grid, exact for monotone f'.
        let samples = 256;
        let ratio = (y / a).powf(1.0 / samples as f64);
        let mut prev = f_deriv(a);
        let mut t = a;
        let mut tv = 0.0;
        for i in 1..=samples {
            t = if i == samples { y } else { t * ratio };
            let cur = f_deriv(t);
            tv += (cur - prev).abs();
            prev = cur;
        }
        tail_bound = tv / 8.0;
    }
    Ok(EulerMaclaurinResult {
        value: acc.value(),
        abs_err_estimate: err + acc.error_bound() + tail_bound,
        cells,
        tail_bound,
    })
}

/// `Σ_{X<n≤Y} f(n)` through the first-order Euler–Maclaurin formula with both
/// integrals done by adaptive quadrature.
pub fn euler_maclaurin_sum<F, D>(f: F, f_deriv: D, x0: f64, y: f64) -> Result<EulerMaclaurinResult>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(x0.is_finite() && y.is_finite()) || x0 >= y {
        return Err(Error::domain(
            "euler_maclaurin_sum",
            format!("need X < Y, got X = {x0}, Y = {y}"),
        ));
    }
    let opts = QuadOptions { abs_tol: 1e-15, ..QuadOptions::rel(1e-13) };
    let main = integrate(&f, x0, y, opts).map_err(|e| {
        Error::numeric("euler_maclaurin_sum", format!("∫f on [{x0}, {y}]: {e}"))
    })?;
    let correction = psi_integral(&f_deriv, x0, y).map_err(|e| {
        Error::numeric("euler_maclaurin_sum", format!("∫ψf' on [{x0}, {y}]: {e}"))
    })?;
    let fy = f(y);
    let fx = f(x0);
    let mut acc = CompensatedSum::new();
    acc.add(main.value);
    acc.add(-psi(y) * fy);
    acc.add(psi(x0) * fx);
    acc.add(correction.value);
    let boundary_err = f64::EPSILON * (fy.abs() + fx.abs());
    Ok(EulerMaclaurinResult {
        value: acc.value(),
        abs_err_estimate: main.abs_err_estimate
            + correction.abs_err_estimate
            + boundary_err
            + acc.error_bound(),
        cells: correction.cells,
        tail_bound: correction.tail_bound,
    })
}

/// The auxiliary sums appearing when `Σ 1/li n` is split term by term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxSumKind {
    /// `Σ log n / n`, main term `½ log² x`, constant `c_1`.
    LogOverN,
    /// `Σ 1/n`, main term `log x`, constant `c_2`.
    RecipN,
    /// `Σ k_1/(n log n)`, main term `log log x`, constant `c_3`.
    RecipNLog,
    /// `Σ k_r/(n log^r n)` for `r ≥ 2`, main term `−k_r/((r−1) log^{r−1} x)`,
    /// constant `D_r`.
    RecipNLogR(u32),
}

impl AuxSumKind {
    fn validate(self) -> Result<()> {
        match self {
            AuxSumKind::RecipNLogR(r) if r < 2 => {
                Err(Error::domain("aux_sum", format!("RECIP_N_LOG_R needs r >= 2, got {r}")))
            }
            _ => Ok(()),
        }
    }

    /// Coefficient `k_r` multiplying the kind's integrand (1 where none).
    fn coefficient(self, k: &KTable) -> Result<f64> {
        match self {
            AuxSumKind::LogOverN | AuxSumKind::RecipN => Ok(1.0),
            AuxSumKind::RecipNLog => {
                k.require("aux_sum", 1)?;
                Ok(k.get_f64(1).unwrap())
            }
            AuxSumKind::RecipNLogR(r) => {
                k.require("aux_sum", r as usize)?;
                Ok(k.get_f64(r as usize).unwrap())
            }
        }
    }

    /// Summand `f(t)`.
    pub fn term(self, coef: f64, t: f64) -> f64 {
        let l = t.ln();
        match self {
            AuxSumKind::LogOverN => l / t,
            AuxSumKind::RecipN => 1.0 / t,
            AuxSumKind::RecipNLog => coef / (t * l),
            AuxSumKind::RecipNLogR(r) => coef / (t * l.powi(r as i32)),
        }
    }

    /// Derivative `f'(t)`.
    pub fn term_deriv(self, coef: f64, t: f64) -> f64 {
        let l = t.ln();
        let t2 = t * t;
        match self {
            AuxSumKind::LogOverN => (1.0 - l) / t2,
            AuxSumKind::RecipN => -1.0 / t2,
            AuxSumKind::RecipNLog => -coef * (l + 1.0) / (t2 * l * l),
            AuxSumKind::RecipNLogR(r) => {
                -coef * (l + r as f64) / (t2 * l.powi(r as i32 + 1))
            }
        }
    }

    /// Main term without its additive constant.
    pub fn main_term(self, coef: f64, x: f64) -> f64 {
        let l = x.ln();
        match self {
            AuxSumKind::LogOverN => 0.5 * l * l,
            AuxSumKind::RecipN => l,
            AuxSumKind::RecipNLog => coef * l.ln(),
            AuxSumKind::RecipNLogR(r) => {
                let r1 = r as f64 - 1.0;
                -coef / (r1 * l.powi(r as i32 - 1))
            }
        }
    }

    /// Size of the remainder after main term and constant:
    /// `log x/x`, `1/x`, `1/(x log x)`, `1/(x log^r x)`.
    pub fn remainder_scale(self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            AuxSumKind::LogOverN => l / x,
            AuxSumKind::RecipN => 1.0 / x,
            AuxSumKind::RecipNLog => 1.0 / (x * l),
            AuxSumKind::RecipNLogR(r) => 1.0 / (x * l.powi(r as i32)),
        }
    }
}

impl fmt::Display for AuxSumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxSumKind::LogOverN => f.write_str("LOG_OVER_N"),
            AuxSumKind::RecipN => f.write_str("RECIP_N"),
            AuxSumKind::RecipNLog => f.write_str("RECIP_N_LOG"),
            AuxSumKind::RecipNLogR(r) => write!(f, "RECIP_N_LOG_R({r})"),
        }
    }
}

impl FromStr for AuxSumKind {
    type Err = Error;

    /// Accepts `LOG_OVER_N`, `RECIP_N`, `RECIP_N_LOG`, `RECIP_N_LOG_R(r)` and
    /// the lower-case dashed forms (`recip-n-log-r:3`).
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        let kind = match norm.as_str() {
            "LOG_OVER_N" => AuxSumKind::LogOverN,
            "RECIP_N" => AuxSumKind::RecipN,
            "RECIP_N_LOG" => AuxSumKind::RecipNLog,
            other => {
                let arg = other
                    .strip_prefix("RECIP_N_LOG_R")
                    .map(|rest| rest.trim_start_matches([':', '(']).trim_end_matches(')'))
                    .ok_or_else(|| Error::domain("aux_sum", format!("unknown kind {s:?}")))?;
                let r: u32 = arg
                    .parse()
                    .map_err(|_| Error::domain("aux_sum", format!("bad r in {s:?}")))?;
                AuxSumKind::RecipNLogR(r)
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxSumResult {
    pub kind: AuxSumKind,
    pub x: f64,
    /// `Σ_{3≤n≤x} f(n)`.
    pub value: f64,
    /// Constant-free main term at `x`.
    pub main_term: f64,
    /// `value − main_term`: the estimate of `c_1`, `c_2`, `c_3` or `D_r` at `x`.
    pub constant_estimate: f64,
    pub abs_err_estimate: f64,
}

/// `Σ_{3≤n≤N} f(n)` in fixed blocks, reduced in block order.
fn direct_sum(kind: AuxSumKind, coef: f64, n_max: u64) -> CompensatedSum {
    if n_max < 3 {
        return CompensatedSum::new();
    }
    let n_blocks = (n_max - 3) / DIRECT_BLOCK + 1;
    let parts: Vec<CompensatedSum> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = 3 + b * DIRECT_BLOCK;
            let hi = (lo + DIRECT_BLOCK - 1).min(n_max);
            (lo..=hi).map(|n| kind.term(coef, n as f64)).collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Evaluates one auxiliary sum at `x` and its constant estimate there.
pub fn aux_sum(kind: AuxSumKind, x: f64, k: &KTable) -> Result<AuxSumResult> {
    kind.validate()?;
    if x.is_nan() || x < 3.0 {
        return Err(Error::domain("aux_sum", format!("x = {x} < 3")));
    }
    if !x.is_finite() {
        return Err(Error::domain("aux_sum", "x must be finite"));
    }
    let coef = kind.coefficient(k)?;
    let n_max = x.floor() as u64;
    let (value, abs_err) = if n_max <= DIRECT_CUTOFF {
        let s = direct_sum(kind, coef, n_max);
        // Each term carries a few ulps from log and division.
        (s.value(), s.error_bound() + 4.0 * f64::EPSILON * s.value().abs())
    } else {
        let head = direct_sum(kind, coef, DIRECT_CUTOFF);
        let tail = euler_maclaurin_sum(
            |t| kind.term(coef, t),
            |t| kind.term_deriv(coef, t),
            DIRECT_CUTOFF as f64,
            x,
        )?;
        let mut acc = head;
        acc.add(tail.value);
        (
            acc.value(),
            acc.error_bound() + 4.0 * f64::EPSILON * head.value().abs() + tail.abs_err_estimate,
        )
    };
    let main_term = kind.main_term(coef, x);
    Ok(AuxSumResult {
        kind,
        x,
        value,
        main_term,
        constant_estimate: value - main_term,
        abs_err_estimate: abs_err,
    })
}
