//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol·|I|)` or the panel cap is hit. Error
//! estimates follow QUADPACK's rescaling of `|K15 − G7|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::compensated::CompensatedSum;
use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// Numerical integral with an absolute-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_err_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_panels: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

/// One K15 panel with its rescaled error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub err: f64,
    /// Kronrod estimate of `∫|f|`.
    pub abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Applies the Gauss–Kronrod 7/15 pair once on `[a, b]`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let value = res_k * half;
    let abs_value = res_abs * half.abs();
    let err = rescale_error(err, abs_value, res_asc * half.abs());
    Panel { a, b, value, err, abs_value }
}

/// Integrates `f` over `[a, b]` (requires `a ≤ b`).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::domain("integrate", format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_err_estimate: 0.0 });
    }
    let first = gk15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::numeric(
            "integrate",
            format!("non-finite integrand on [{a}, {b}]"),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.err;
    heap.push(first);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::numeric(
                "integrate",
                format!(
                    "panel cap {} reached on [{a}, {b}]: estimate {total}, error {total_err:e} > {tol:e}",
                    opts.max_panels
                ),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel is at floating-point resolution; further bisection is futile.
            heap.push(worst);
            return Err(Error::numeric(
                "integrate",
                format!("panel width underflow near {mid}: error {total_err:e} > {tol:e}"),
            ));
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::numeric(
                "integrate",
                format!("non-finite integrand near {mid}"),
            ));
        }
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // Re-add the final panels with compensation so the running update drift
    // does not leak into the result.
    let panels = heap.into_vec();
    let value: CompensatedSum = panels.iter().map(|p| p.value).collect();
    let err: f64 = panels.iter().map(|p| p.err).sum();
    Ok(QuadratureResult {
        value: value.value(),
        abs_err_estimate: err + value.error_bound(),
    })
}
