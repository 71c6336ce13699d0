//! Segmented, odd-only sieve of Eratosthenes and the exact reciprocal sum
//! `S(x) = Σ_{2≤n≤x} 1/π(n)`.
//!
//! Segment `s` covers the integers `[s·2W, (s+1)·2W)` where `W` is the
//! segment size in flags; flag `i` stands for the odd number `s·2W + 2i + 1`.
//! The partition depends only on `W`, never on the thread count, and partial
//! sums are merged in segment-index order, so results are bit-reproducible for
//! a fixed segment size.

use rayon::prelude::*;

use crate::compensated::{CompensatedSum, UNIT_ROUNDOFF};
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;
pub const MIN_SEGMENT_SIZE: usize = 1024;

/// Segments sieved concurrently before their sums are reduced.
const BATCH_SEGMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Largest `x` this configuration may be asked about.
    pub limit: u64,
    /// Flags (odd numbers) per segment.
    pub segment_size: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SieveConfig {
    pub fn new(limit: u64) -> Result<Self> {
        let cfg = SieveConfig {
            limit,
            segment_size: DEFAULT_SEGMENT_SIZE,
            threads: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_segment_size(mut self, segment_size: usize) -> Result<Self> {
        self.segment_size = segment_size;
        self.validate()?;
        Ok(self)
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Result<Self> {
        self.threads = threads;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.limit < 2 {
            return Err(Error::domain("SieveConfig", format!("limit {} < 2", self.limit)));
        }
        if self.limit > i64::MAX as u64 {
            return Err(Error::domain("SieveConfig", "limit exceeds 2^63 - 1"));
        }
        if self.segment_size < MIN_SEGMENT_SIZE {
            return Err(Error::domain(
                "SieveConfig",
                format!("segment_size {} < {}", self.segment_size, MIN_SEGMENT_SIZE),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("SieveConfig", "threads must be at least 1"));
        }
        Ok(())
    }
}

/// Exact partial sum of `1/π(n)` over `2 ≤ n ≤ x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExactSumResult {
    pub x: u64,
    pub value: f64,
    /// Bound on the accumulated rounding error, including the rounding of
    /// each reciprocal.
    pub comp_error_bound: f64,
    pub n_terms: u64,
}

/// Odd primes up to `√limit`, used to cross off every segment.
fn base_primes(limit: u64) -> Vec<u64> {
    let root = limit.isqrt() as usize;
    let mut composite = vec![false; root + 1];
    let mut primes = Vec::new();
    for p in 3..=root {
        if p % 2 == 0 || composite[p] {
            continue;
        }
        primes.push(p as u64);
        let mut m = p * p;
        while m <= root {
            composite[m] = true;
            m += 2 * p;
        }
    }
    primes
}

/// Span of integers covered by one segment.
#[inline]
fn span(segment_size: usize) -> u64 {
    2 * segment_size as u64
}

/// Sieves segment `seg`: on return `flags[i] != 0` iff `lo + 2i + 1` is prime.
fn sieve_segment(seg: u64, segment_size: usize, primes: &[u64], flags: &mut Vec<u8>) {
    let lo = seg * span(segment_size);
    let hi = lo + span(segment_size);
    flags.clear();
    flags.resize(segment_size, 1);
    if seg == 0 {
        flags[0] = 0; // n = 1
    }
    for &p in primes {
        let sq = p * p;
        if sq >= hi {
            break;
        }
        let mut start = if sq >= lo { sq } else { lo.div_ceil(p) * p };
        if start % 2 == 0 {
            start += p;
        }
        let mut i = ((start - lo - 1) / 2) as usize;
        let step = p as usize;
        while i < segment_size {
            flags[i] = 0;
            i += step;
        }
    }
}

/// Number of primes in segment `seg` that are at most `limit`.
fn count_segment(seg: u64, segment_size: usize, flags: &[u8], limit: u64) -> u64 {
    let lo = seg * span(segment_size);
    let mut count = 0u64;
    if lo <= 2 && 2 <= limit {
        count += 1;
    }
    let last_odd = if limit < lo + 1 { return count } else { (limit - lo - 1) / 2 };
    let end = (last_odd as usize + 1).min(segment_size);
    count + flags[..end].iter().map(|&f| f as u64).sum::<u64>()
}

/// Partial sums produced by one segment given `π(lo − 1)`.
struct SegmentSum {
    acc: CompensatedSum,
    /// Checkpoint values of the in-segment partial sum, `(x, partial)`.
    checkpoints: Vec<(u64, CompensatedSum)>,
}

fn sum_segment(
    seg: u64,
    segment_size: usize,
    flags: &[u8],
    pi_before: u64,
    limit: u64,
    checkpoints: &[u64],
) -> SegmentSum {
    let lo = seg * span(segment_size);
    let hi = (lo + span(segment_size) - 1).min(limit);
    let mut acc = CompensatedSum::new();
    let mut cps = Vec::with_capacity(checkpoints.len());
    let mut cp_iter = checkpoints.iter().copied().peekable();
    let mut pi = pi_before;
    let mut recip = if pi > 0 { 1.0 / pi as f64 } else { 0.0 };
    let first = lo.max(2);
    for n in first..=hi {
        let prime = if n & 1 == 1 {
            flags[((n - lo) >> 1) as usize] != 0
        } else {
            n == 2
        };
        if prime {
            pi += 1;
            recip = 1.0 / pi as f64;
        }
        acc.add(recip);
        while cp_iter.peek() == Some(&n) {
            cps.push((n, acc));
            cp_iter.next();
        }
    }
    SegmentSum { acc, checkpoints: cps }
}

pub(crate) fn run_in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::numeric("thread_pool", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Computes `S(x)` at every requested checkpoint with a single sieve pass up
/// to the largest one. Results come back in the order of `xs`.
pub fn exact_recip_sums(xs: &[u64], cfg: &SieveConfig) -> Result<Vec<ExactSumResult>> {
    cfg.validate()?;
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    for &x in xs {
        if x < 2 {
            return Err(Error::domain("exact_recip_sum", format!("x = {x} < 2")));
        }
        if x > cfg.limit {
            return Err(Error::domain(
                "exact_recip_sum",
                format!("x = {x} exceeds configured limit {}", cfg.limit),
            ));
        }
    }
    let mut sorted: Vec<u64> = xs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let limit = *sorted.last().unwrap();
    let segment_size = cfg.segment_size;
    let width = span(segment_size);
    let n_segments = limit / width + 1;
    let primes = base_primes(limit);

    let table = run_in_pool(cfg.threads, || {
        let mut global = CompensatedSum::new();
        let mut pi = 0u64;
        let mut values: Vec<(u64, CompensatedSum)> = Vec::with_capacity(sorted.len());
        let mut buffers: Vec<Vec<u8>> = vec![Vec::new(); BATCH_SEGMENTS];
        let mut batch_start = 0u64;
        while batch_start < n_segments {
            let batch_end = (batch_start + BATCH_SEGMENTS as u64).min(n_segments);
            let used = (batch_end - batch_start) as usize;
            let counts: Vec<u64> = buffers[..used]
                .par_iter_mut()
                .enumerate()
                .map(|(j, flags)| {
                    let seg = batch_start + j as u64;
                    sieve_segment(seg, segment_size, &primes, flags);
                    count_segment(seg, segment_size, flags, limit)
                })
                .collect();
            let mut pi_before = Vec::with_capacity(used);
            for c in &counts {
                pi_before.push(pi);
                pi += c;
            }
            let sums: Vec<SegmentSum> = buffers[..used]
                .par_iter()
                .enumerate()
                .map(|(j, flags)| {
                    let seg = batch_start + j as u64;
                    let lo = seg * width;
                    let a = sorted.partition_point(|&x| x < lo);
                    let b = sorted.partition_point(|&x| x < lo + width);
                    sum_segment(seg, segment_size, flags, pi_before[j], limit, &sorted[a..b])
                })
                .collect();
            for s in sums {
                for (x, partial) in s.checkpoints {
                    let mut v = global;
                    v.merge(&partial);
                    values.push((x, v));
                }
                global.merge(&s.acc);
            }
            batch_start = batch_end;
        }
        values
    })?;

    let lookup = |x: u64| -> ExactSumResult {
        let idx = table.binary_search_by_key(&x, |e| e.0).expect("checkpoint recorded");
        let acc = &table[idx].1;
        let value = acc.value();
        ExactSumResult {
            x,
            value,
            comp_error_bound: acc.error_bound() + UNIT_ROUNDOFF * value,
            n_terms: x - 1,
        }
    };
    Ok(xs.iter().map(|&x| lookup(x)).collect())
}

/// `S(x) = Σ_{2≤n≤x} 1/π(n)`, summed in ascending `n` with compensation.
pub fn exact_recip_sum(x: u64, cfg: &SieveConfig) -> Result<ExactSumResult> {
    if x < 2 {
        return Err(Error::domain("exact_recip_sum", format!("x = {x} < 2")));
    }
    Ok(exact_recip_sums(&[x], cfg)?[0])
}

/// Streams `(n, π(n))` for `n = 2..=limit`, sieving one segment at a time.
pub struct PiStream {
    limit: u64,
    segment_size: usize,
    primes: Vec<u64>,
    flags: Vec<u8>,
    seg: u64,
    next: u64,
    pi: u64,
}

impl Iterator for PiStream {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        if self.next > self.limit {
            return None;
        }
        let n = self.next;
        let width = span(self.segment_size);
        if n / width != self.seg || self.flags.is_empty() {
            self.seg = n / width;
            sieve_segment(self.seg, self.segment_size, &self.primes, &mut self.flags);
        }
        let lo = self.seg * width;
        let prime = if n & 1 == 1 {
            self.flags[((n - lo) >> 1) as usize] != 0
        } else {
            n == 2
        };
        if prime {
            self.pi += 1;
        }
        self.next += 1;
        Some((n, self.pi))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.limit + 1).saturating_sub(self.next) as usize;
        (left, Some(left))
    }
}

pub fn pi_stream(limit: u64) -> Result<PiStream> {
    if limit < 2 {
        return Err(Error::domain("pi_stream", format!("limit = {limit} < 2")));
    }
    let segment_size = DEFAULT_SEGMENT_SIZE.min((limit as usize / 2 + 1).max(MIN_SEGMENT_SIZE));
    Ok(PiStream {
        limit,
        segment_size,
        primes: base_primes(limit),
        flags: Vec::new(),
        seg: 0,
        next: 2,
        pi: 0,
    })
}

/// All primes in `[2, limit]`, ascending.
pub fn primes_up_to(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::domain("primes_up_to", format!("limit = {limit} < 2")));
    }
    let segment_size = DEFAULT_SEGMENT_SIZE.min((limit as usize / 2 + 1).max(MIN_SEGMENT_SIZE));
    let width = span(segment_size);
    let primes = base_primes(limit);
    let mut out = vec![2u64];
    let mut flags = Vec::new();
    for seg in 0..=limit / width {
        sieve_segment(seg, segment_size, &primes, &mut flags);
        let lo = seg * width;
        out.extend(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f != 0)
                .map(|(i, _)| lo + 2 * i as u64 + 1)
                .take_while(|&p| p <= limit),
        );
    }
    Ok(out)
}

/// `π(x)` by counting sieve flags segment by segment.
pub fn prime_count(x: u64) -> Result<u64> {
    if x < 2 {
        return Ok(0);
    }
    let segment_size = DEFAULT_SEGMENT_SIZE.min((x as usize / 2 + 1).max(MIN_SEGMENT_SIZE));
    let primes = base_primes(x);
    let mut flags = Vec::new();
    let mut total = 0;
    for seg in 0..=x / span(segment_size) {
        sieve_segment(seg, segment_size, &primes, &mut flags);
        total += count_segment(seg, segment_size, &flags, x);
    }
    Ok(total)
}
