//! Command-line front end.
//!
//! Every subcommand writes a CSV table (header row, comma separated, LF line
//! endings) to `--out` or stdout. Floats use the shortest decimal that
//! round-trips to the same binary64. Global flags can also be set through
//! `PISUM_OUT`, `PISUM_SEGMENT_SIZE`, `PISUM_THREADS` and `PISUM_TOLERANCE`.
//!
//! Exit status: 0 on success, 1 when `verify` checks fail, 2 on usage errors,
//! 3 on numeric failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{
    error_table, fit_b, fit_c, formula12, scaled_ratio, FitReport, TabulatedOracle,
    SCALED_RATIO_LIMIT,
};
use crate::constants::{k_constants, verify_recurrence};
use crate::error::Error;
use crate::li::{li, li_expansion, li_quadrature, recip_li_expansion};
use crate::sieve::{exact_recip_sum, run_in_pool, SieveConfig, DEFAULT_SEGMENT_SIZE, MIN_SEGMENT_SIZE};
use crate::summation::{aux_sum, AuxSumKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const DEFAULT_TOLERANCE: f64 = 0.1;

/// Parses a nonnegative integer written either plainly or in scientific
/// notation (`1000000`, `1e6`, `2.5e3`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > i64::MAX as f64 {
        return Err(format!("not a nonnegative integer: {s:?}"));
    }
    Ok(v as u64)
}

/// Ascending list of grid points.
///
/// Accepts `start:stop:x<factor>` (geometric, e.g. `1e4:1e8:x10`), or a comma
/// separated list of points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid(pub Vec<u64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let points = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts.as_slice() else {
                return Err(format!("grid {s:?}: expected start:stop:x<factor>"));
            };
            let start = parse_count(start)?;
            let stop = parse_count(stop)?;
            let factor = step
                .strip_prefix('x')
                .ok_or_else(|| format!("grid {s:?}: step must look like x10"))
                .and_then(parse_count)?;
            if factor < 2 {
                return Err(format!("grid {s:?}: factor must be at least 2"));
            }
            if start == 0 || start > stop {
                return Err(format!("grid {s:?}: need 0 < start <= stop"));
            }
            let mut pts = Vec::new();
            let mut x = start;
            while x <= stop {
                pts.push(x);
                match x.checked_mul(factor) {
                    Some(next) => x = next,
                    None => break,
                }
            }
            pts
        } else {
            s.split(',').map(parse_count).collect::<Result<Vec<_>, _>>()?
        };
        if points.is_empty() {
            return Err(format!("grid {s:?} is empty"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("grid {s:?} must be strictly ascending"));
        }
        Ok(Grid(points))
    }
}

#[derive(Debug, Parser)]
#[command(name = "pisum", version, about = "Exact and asymptotic evaluation of Σ 1/π(n)")]
pub struct Cli {
    /// Output file (default: stdout)
    #[arg(long, global = true, env = "PISUM_OUT")]
    pub out: Option<PathBuf>,
    /// Odd numbers per sieve segment
    #[arg(long, global = true, env = "PISUM_SEGMENT_SIZE", default_value_t = DEFAULT_SEGMENT_SIZE)]
    pub segment_size: usize,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "PISUM_THREADS")]
    pub threads: Option<usize>,
    /// Spread below which a fitted constant counts as stabilized
    #[arg(long, global = true, env = "PISUM_TOLERANCE", default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact S(x) = Σ_{2≤n≤x} 1/π(n)
    Exact {
        #[arg(long, value_parser = parse_count)]
        x: u64,
    },
    /// li x by the exponential-integral route and by quadrature
    Li {
        #[arg(long, required = true, num_args = 1..)]
        x: Vec<f64>,
        /// Also evaluate the truncated expansions of li x and 1/li x
        #[arg(long)]
        m: Option<usize>,
    },
    /// Table of the constants k_1..k_m
    Kconst {
        #[arg(long)]
        m: usize,
    },
    /// Auxiliary sums and their constant estimates
    Auxsum {
        /// LOG_OVER_N, RECIP_N, RECIP_N_LOG or RECIP_N_LOG_R(r)
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "1e4:1e7:x10")]
        grid: Grid,
    },
    /// Fit C and B on a grid and tabulate the scaled error of the expansion
    Verify {
        #[arg(long, default_value = "1e4:1e8:x10")]
        grid: Grid,
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Also write the fitted samples as CSV
        #[arg(long)]
        fit_csv: Option<PathBuf>,
    },
    /// Integral form of the asymptotic formula
    Formula12 {
        #[arg(long, required = true, num_args = 1..)]
        x: Vec<f64>,
        /// Additive constant; fitted against the sieve at --fit-x when absent
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value = "1e7", value_parser = parse_count)]
        fit_x: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(io::Error),
    Csv(csv::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } => CliError::Usage(e.to_string()),
            Error::Numeric { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Serialize)]
struct LiRow {
    x: f64,
    li: f64,
    abs_err_estimate: f64,
    li_quadrature: f64,
    quadrature_abs_err: f64,
    m: Option<usize>,
    li_expansion: Option<f64>,
    recip_li_expansion: Option<f64>,
}

#[derive(Serialize)]
struct KRow {
    r: usize,
    k_r: String,
}

#[derive(Serialize)]
struct AuxRow {
    kind: String,
    x: f64,
    value: f64,
    main_term: f64,
    constant_estimate: f64,
}

#[derive(Serialize)]
struct FitRow {
    constant: String,
    m: Option<usize>,
    x: u64,
    estimate: f64,
}

#[derive(Serialize)]
struct Formula12Row {
    x: f64,
    value: f64,
    b: f64,
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn csv_writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_out(out)?))
}

fn sieve_config(cli: &Cli, limit: u64) -> Result<SieveConfig, CliError> {
    if cli.segment_size < MIN_SEGMENT_SIZE {
        return Err(usage(format!("--segment-size must be at least {MIN_SEGMENT_SIZE}")));
    }
    if cli.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(SieveConfig::new(limit)?
        .with_segment_size(cli.segment_size)?
        .with_threads(cli.threads)?)
}

fn summarize(report: &FitReport) -> String {
    format!(
        "fit {}{}: central={:?} at x={} spread={:?} (retained {} of {}) tolerance={:?} stabilized={}",
        report.constant_name,
        report.m.map(|m| format!(" (m={m})")).unwrap_or_default(),
        report.central_value,
        report.anchor_x(),
        report.spread,
        report.retained().len(),
        report.samples.len(),
        report.tolerance,
        report.stabilized
    )
}

/// Runs one parsed command; `Ok(true)` means every requested check passed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    if !(cli.tolerance.is_finite() && cli.tolerance >= 0.0) {
        return Err(usage("--tolerance must be a finite nonnegative number"));
    }
    match &cli.command {
        Command::Exact { x } => {
            if *x < 2 {
                return Err(usage(format!("--x must be at least 2, got {x}")));
            }
            let cfg = sieve_config(cli, *x)?;
            let r = exact_recip_sum(*x, &cfg)?;
            let mut w = csv_writer(&cli.out)?;
            w.serialize(r)?;
            w.flush()?;
            Ok(true)
        }
        Command::Li { x, m } => {
            if let Some(bad) = x.iter().find(|v| !(**v >= 2.0) || !v.is_finite()) {
                return Err(usage(format!("--x must be finite and at least 2, got {bad}")));
            }
            let k = match m {
                Some(0) => None,
                Some(m) => Some(k_constants(*m)?),
                None => None,
            };
            let mut w = csv_writer(&cli.out)?;
            for &xv in x {
                let a = li(xv)?;
                let b = li_quadrature(xv)?;
                let (le, re) = match m {
                    Some(m) => (
                        Some(li_expansion(xv, *m)?.value),
                        k.as_ref().map(|k| recip_li_expansion(xv, *m, k)).transpose()?.map(|e| e.value),
                    ),
                    None => (None, None),
                };
                w.serialize(LiRow {
                    x: xv,
                    li: a.value,
                    abs_err_estimate: a.abs_err_estimate,
                    li_quadrature: b.value,
                    quadrature_abs_err: b.abs_err_estimate,
                    m: *m,
                    li_expansion: le,
                    recip_li_expansion: re,
                })?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Kconst { m } => {
            if *m < 1 {
                return Err(usage("--m must be at least 1"));
            }
            let k = k_constants(*m)?;
            if !verify_recurrence(&k) {
                return Err(CliError::Numeric("k table failed its recurrence check".into()));
            }
            let mut w = csv_writer(&cli.out)?;
            for (i, v) in k.values().iter().enumerate() {
                w.serialize(KRow { r: i + 1, k_r: v.to_string() })?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Auxsum { kind, grid } => {
            let kind: AuxSumKind = kind.parse()?;
            if grid.0[0] < 3 {
                return Err(usage("auxsum grid points must be at least 3"));
            }
            let r_needed = match kind {
                AuxSumKind::RecipNLogR(r) => r as usize,
                _ => 1,
            };
            let k = k_constants(r_needed)?;
            let rows = run_in_pool(cli.threads, || {
                grid.0
                    .iter()
                    .map(|&x| aux_sum(kind, x as f64, &k))
                    .collect::<Result<Vec<_>, Error>>()
            })??;
            let mut w = csv_writer(&cli.out)?;
            for r in rows {
                w.serialize(AuxRow {
                    kind: r.kind.to_string(),
                    x: r.x,
                    value: r.value,
                    main_term: r.main_term,
                    constant_estimate: r.constant_estimate,
                })?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Verify { grid, m, fit_csv } => {
            if *m < 2 {
                return Err(usage("--m must be at least 2"));
            }
            if grid.0.len() < 3 {
                return Err(usage("verify needs a grid of at least 3 points"));
            }
            let k = k_constants(*m)?;
            let cfg = sieve_config(cli, *grid.0.last().unwrap())?;
            let oracle = TabulatedOracle::from_sieve(&grid.0, &cfg)?;
            let c_fit = fit_c(&grid.0, *m, &k, &oracle, cli.tolerance)?;
            let b_fit = fit_b(&grid.0, &oracle, cli.tolerance)?;
            let rows = error_table(&grid.0, *m, c_fit.central_value, &k, &oracle)?;
            let ratio = scaled_ratio(&rows, Some(c_fit.anchor_x()));
            let ratio_ok = ratio.is_some_and(|r| r <= SCALED_RATIO_LIMIT);

            let mut w = csv_writer(&cli.out)?;
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            if let Some(path) = fit_csv {
                let mut fw = csv_writer(&Some(path.clone()))?;
                for rep in [&c_fit, &b_fit] {
                    for &(x, est) in &rep.samples {
                        fw.serialize(FitRow {
                            constant: rep.constant_name.to_string(),
                            m: rep.m,
                            x,
                            estimate: est,
                        })?;
                    }
                }
                fw.flush()?;
            }
            eprintln!("{}", summarize(&c_fit));
            eprintln!("{}", summarize(&b_fit));
            match ratio {
                Some(r) => eprintln!(
                    "scaled_diff ratio (max/min, anchor x={} excluded) = {r:?} limit={SCALED_RATIO_LIMIT:?} ok={ratio_ok}",
                    c_fit.anchor_x()
                ),
                None => eprintln!("scaled_diff ratio undefined (fewer than two nonzero rows)"),
            }
            Ok(c_fit.stabilized && b_fit.stabilized && ratio_ok)
        }
        Command::Formula12 { x, b, fit_x } => {
            if let Some(bad) = x.iter().find(|v| !(**v > 3.0) || !v.is_finite()) {
                return Err(usage(format!("--x must be finite and exceed 3, got {bad}")));
            }
            let b = match b {
                Some(b) => *b,
                None => {
                    if *fit_x < 4 {
                        return Err(usage("--fit-x must be at least 4"));
                    }
                    let cfg = sieve_config(cli, *fit_x)?;
                    let s = exact_recip_sum(*fit_x, &cfg)?.value;
                    s - formula12(*fit_x as f64, 0.0)?
                }
            };
            let mut w = csv_writer(&cli.out)?;
            for &xv in x {
                w.serialize(Formula12Row { x: xv, value: formula12(xv, b)?, b })?;
            }
            w.flush()?;
            Ok(true)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("verification checks failed");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("pisum: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1000000"), Ok(1_000_000));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn grid_spec() {
        assert_eq!(
            "1e4:1e8:x10".parse::<Grid>().unwrap().0,
            vec![10_000, 100_000, 1_000_000, 10_000_000, 100_000_000]
        );
        assert_eq!("1000:5000:x2".parse::<Grid>().unwrap().0, vec![1000, 2000, 4000]);
        assert_eq!("10,20,1e3".parse::<Grid>().unwrap().0, vec![10, 20, 1000]);
        for bad in ["1e4:1e8", "1e4:1e8:10", "1e4:1e8:x1", "1e8:1e4:x10", "5,3", "", "1e4:1e8:x10:x2"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn usage_errors_map_to_exit_two() {
        assert_eq!(main_with_args(["pisum", "exact", "--x", "1"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pisum", "kconst", "--m", "0"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pisum", "verify", "--grid", "1e4:1e6"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pisum", "auxsum", "--kind", "nope"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pisum", "frobnicate"]), EXIT_USAGE);
    }
}
