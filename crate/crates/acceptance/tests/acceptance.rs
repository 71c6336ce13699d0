//! One line per acceptance criterion. Exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use pisum::asymptotics::{
    error_table, fit_b, fit_c, formula12, formula8, scaled_ratio, RecipSumOracle, TabulatedOracle,
    SCALED_RATIO_LIMIT,
};
use pisum::compensated::CompensatedSum;
use pisum::constants::{k_constants, verify_recurrence};
use pisum::li::{li, li_expansion, li_quadrature, recip_li_expansion};
use pisum::sieve::{exact_recip_sum, pi_stream, primes_up_to, SieveConfig};
use pisum::summation::{euler_maclaurin_sum, AuxSumKind};

const GRID: [u64; 5] = [10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];
const LI_DECADES: [f64; 9] = [1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12];

const LI_ROUTE_REL_TOL: f64 = 1e-10;
const C_M_INDEPENDENCE_TOL: f64 = 1e-3;
const B_DRIFT_TOL: f64 = 1e-6;
const EM_TOL: f64 = 1e-9;
/// Bound on `|S − (½L² − L − log L)|` across the grid.
const EQ5_K: f64 = 10.0;
/// Bound on `|S − ½L²| / L` across the grid.
const EQ4_K: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn oracle() -> &'static TabulatedOracle {
    static ORACLE: OnceLock<TabulatedOracle> = OnceLock::new();
    ORACLE.get_or_init(|| {
        let cfg = SieveConfig::new(*GRID.last().unwrap()).unwrap();
        TabulatedOracle::from_sieve(&GRID, &cfg).unwrap()
    })
}

fn s(x: u64) -> f64 {
    oracle().recip_sum(x).unwrap()
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn decade_ratio(vals: &[f64]) -> f64 {
    let max = vals.iter().copied().fold(0.0, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn criterion_1() -> Outcome {
    let k = k_constants(30).unwrap();
    let head: Vec<String> = (1..=3).map(|r| k.get(r).unwrap().to_string()).collect();
    let head_ok = head == ["1", "3", "13"];
    let rec_ok = (1..=30).all(|m| verify_recurrence(&k_constants(m).unwrap()));
    outcome(
        head_ok && rec_ok,
        format!("k_1..k_3 = {}; recurrence exact for m <= 30: {rec_ok}", head.join(", ")),
    )
}

fn criterion_2() -> Outcome {
    let primes = primes_up_to(10_000).unwrap();
    let trial: Vec<u64> = (2..=10_000).filter(|&n| is_prime(n)).collect();
    let list_ok = primes.len() == 1229 && primes == trial;
    let mut prev = 0;
    let mut steps_ok = true;
    let mut trial_pi = 0;
    for (n, pi) in pi_stream(1_000_000).unwrap() {
        let step = pi - prev;
        let p = is_prime(n);
        trial_pi += p as u64;
        steps_ok &= step <= 1 && step == p as u64;
        prev = pi;
    }
    let pi_ok = prev == trial_pi && prev == 78_498;
    outcome(
        list_ok && steps_ok && pi_ok,
        format!(
            "primes_up_to(1e4) has {} entries (trial division {}); steps 0/1: {steps_ok}; π(1e6) = {prev} vs {trial_pi}",
            primes.len(),
            trial.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = (0.0, 0.0);
    for e in 1..=12 {
        let x = 10f64.powi(e);
        let a = li(x).unwrap().value;
        let b = li_quadrature(x).unwrap().value;
        let rel = ((a - b) / a).abs();
        if rel > worst.0 {
            worst = (rel, x);
        }
    }
    outcome(
        worst.0 <= LI_ROUTE_REL_TOL,
        format!("max relative gap {:.3e} at x = {:e} (tol {LI_ROUTE_REL_TOL:e})", worst.0, worst.1),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = (0.0, 0);
    for m in 0..=6 {
        let vals: Vec<f64> = LI_DECADES
            .iter()
            .map(|&x| {
                let l = x.ln();
                (li(x).unwrap().value - li_expansion(x, m).unwrap().value).abs() * l.powi(m as i32 + 2) / x
            })
            .collect();
        let r = decade_ratio(&vals);
        if r > worst.0 {
            worst = (r, m);
        }
    }
    outcome(
        worst.0 <= SCALED_RATIO_LIMIT,
        format!("max/min scaled remainder over 1e4..1e12: worst {:.4} at m = {} (limit {SCALED_RATIO_LIMIT})", worst.0, worst.1),
    )
}

fn criterion_5() -> Outcome {
    let k = k_constants(5).unwrap();
    let mut ratios = Vec::new();
    for m in 1..=5 {
        let vals: Vec<f64> = LI_DECADES
            .iter()
            .map(|&x| {
                let l = x.ln();
                let e = recip_li_expansion(x, m, &k).unwrap().value;
                (1.0 / li(x).unwrap().value - e).abs() * x * l.powi(m as i32 + 1)
            })
            .collect();
        ratios.push(decade_ratio(&vals));
    }
    let pass = ratios.iter().all(|&r| r <= SCALED_RATIO_LIMIT);
    let list: Vec<String> = ratios
        .iter()
        .enumerate()
        .map(|(i, r)| format!("m={}: {r:.4}", i + 1))
        .collect();
    outcome(pass, format!("max/min scaled remainder over 1e4..1e12 ({}; limit {SCALED_RATIO_LIMIT})", list.join(", ")))
}

fn criterion_6() -> Outcome {
    let k = k_constants(5).unwrap();
    let o = oracle();
    let c3 = fit_c(&GRID, 3, &k, o, C_M_INDEPENDENCE_TOL).unwrap();
    let c5 = fit_c(&GRID, 5, &k, o, C_M_INDEPENDENCE_TOL).unwrap();
    let rows = error_table(&GRID, 3, c3.central_value, &k, o).unwrap();
    let ratio = scaled_ratio(&rows, Some(c3.anchor_x()));
    let ratio_ok = ratio.is_some_and(|r| r <= SCALED_RATIO_LIMIT);
    let gap = (c3.central_value - c5.central_value).abs();
    let gap_ok = gap <= C_M_INDEPENDENCE_TOL;
    outcome(
        ratio_ok && gap_ok,
        format!(
            "Ĉ(m=3) = {:.9} at x = 1e8; scaled-error ratio over 1e4..1e7 = {} (limit {SCALED_RATIO_LIMIT}, ok {ratio_ok}); |Ĉ(m=3) − Ĉ(m=5)| = {gap:.3e} (tol {C_M_INDEPENDENCE_TOL:e}, ok {gap_ok})",
            c3.central_value,
            ratio.map_or("undefined".into(), |r| format!("{r:.4}")),
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut eq5_max: f64 = 0.0;
    let mut eq4_max: f64 = 0.0;
    for &x in &GRID {
        let l = (x as f64).ln();
        let sx = s(x);
        eq5_max = eq5_max.max((sx - (0.5 * l * l - l - l.ln())).abs());
        eq4_max = eq4_max.max((sx - 0.5 * l * l).abs() / l);
    }
    outcome(
        eq5_max <= EQ5_K && eq4_max <= EQ4_K,
        format!(
            "max |S − (½L² − L − log L)| = {eq5_max:.6} (K = {EQ5_K}); max |S − ½L²|/L = {eq4_max:.6} (K = {EQ4_K})"
        ),
    )
}

fn criterion_8() -> Outcome {
    let k = k_constants(4).unwrap();
    let o = oracle();
    let b = fit_b(&GRID[..4], o, B_DRIFT_TOL).unwrap();
    let c = fit_c(&GRID, 4, &k, o, B_DRIFT_TOL).unwrap();
    let b_hat = b.central_value;
    let mut losses = Vec::new();
    for &x in GRID.iter().filter(|&&x| x >= 100_000) {
        let e12 = (s(x) - formula12(x as f64, b_hat).unwrap()).abs();
        let e8 = (s(x) - formula8(x as f64, 4, c.central_value, &k).unwrap().value).abs();
        if !(e12 < e8) {
            losses.push(format!("x={x:e}: {e12:.4e} vs {e8:.4e}"));
        }
    }
    let drift = (b.estimate_at(1_000_000).unwrap() - b.estimate_at(10_000_000).unwrap()).abs();
    let drift_ok = drift <= B_DRIFT_TOL;
    let sharper = if losses.is_empty() {
        "formula12 closer at every x >= 1e5".to_string()
    } else {
        format!("formula12 not closer at {}", losses.join("; "))
    };
    outcome(
        losses.is_empty() && drift_ok,
        format!(
            "B̂ = {b_hat:.9} at x = 1e7; {sharper}; |B(1e6) − B(1e7)| = {drift:.3e} (tol {B_DRIFT_TOL:e}, ok {drift_ok})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let kinds = [
        AuxSumKind::RecipN,
        AuxSumKind::LogOverN,
        AuxSumKind::RecipNLog,
        AuxSumKind::RecipNLogR(2),
    ];
    let mut worst: f64 = 0.0;
    for kind in kinds {
        let em = euler_maclaurin_sum(|t| kind.term(1.0, t), |t| kind.term_deriv(1.0, t), 2.5, 1e4 + 0.5)
            .unwrap();
        let direct: CompensatedSum = (3..=10_000u32).map(|n| kind.term(1.0, n as f64)).collect();
        worst = worst.max((em.value - direct.value()).abs());
    }
    outcome(
        worst <= EM_TOL,
        format!("max |Euler–Maclaurin − direct| over four integrands = {worst:.3e} (tol {EM_TOL:e})"),
    )
}

fn criterion_10() -> Outcome {
    let x = 10_000_000;
    let base = SieveConfig::new(x).unwrap();
    let runs: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&t| exact_recip_sum(x, &base.with_threads(Some(t)).unwrap()).unwrap())
        .collect();
    let bits_ok = runs.iter().all(|r| r.value.to_bits() == runs[0].value.to_bits());
    let small = exact_recip_sum(x, &base.with_segment_size(1 << 14).unwrap()).unwrap();
    let gap = (small.value - runs[0].value).abs();
    let bound = small.comp_error_bound + runs[0].comp_error_bound;
    let seg_ok = gap <= bound;
    outcome(
        bits_ok && seg_ok,
        format!(
            "S(1e7) bit-identical over 1/2/4/8 threads: {bits_ok}; segment 2^20 vs 2^14 differ by {gap:.3e} (bound {bound:.3e})"
        ),
    )
}

fn main() {
    type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "constants table", Some(1), criterion_1),
        (2, "sieve correctness", Some(5), criterion_2),
        (3, "li cross-validation", Some(5), criterion_3),
        (4, "li expansion remainder", None, criterion_4),
        (5, "1/li expansion remainder", None, criterion_5),
        (6, "asymptotic formula with fitted C", Some(60), criterion_6),
        (7, "lower-order formulas recovered", None, criterion_7),
        (8, "integral formula with fitted B", None, criterion_8),
        (9, "Euler–Maclaurin tool", None, criterion_9),
        (10, "determinism", None, criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, title, budget, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let elapsed = start.elapsed();
        let mut o = result.unwrap_or_else(|_| outcome(false, "panicked"));
        if let Some(limit) = budget.map(Duration::from_secs) {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime over {}s budget", limit.as_secs()));
            }
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {title}: {} [{:.2}s]", o.detail, elapsed.as_secs_f64());
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: {} of 10 criteria failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
