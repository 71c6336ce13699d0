//! The integer constants `k_m` of the reciprocal-li expansion, defined by
//!
//! ```text
//! k_m + 1!·k_{m−1} + 2!·k_{m−2} + … + (m−1)!·k_1 = m·m!
//! ```
//!
//! Values outgrow `u64` near `m = 20`, so everything is exact `BigInt`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `k_1..k_m`, stored with `values[0] = k_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTable {
    values: Vec<BigInt>,
}

impl KTable {
    /// Wraps arbitrary values without checking the recurrence; use
    /// [`verify_recurrence`] to validate.
    pub fn from_values(values: Vec<BigInt>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("KTable", "table must hold at least k_1"));
        }
        Ok(KTable { values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    /// `k_r` for `1 ≤ r ≤ m`.
    pub fn get(&self, r: usize) -> Option<&BigInt> {
        r.checked_sub(1).and_then(|i| self.values.get(i))
    }

    /// `k_r` rounded to the nearest binary64.
    pub fn get_f64(&self, r: usize) -> Option<f64> {
        self.get(r).and_then(|k| k.to_f64())
    }

    /// Fails unless the table covers every index in `1..=r`.
    pub(crate) fn require(&self, op: &'static str, r: usize) -> Result<()> {
        if r > self.m() {
            Err(Error::domain(
                op,
                format!("k table covers 1..{} but index {r} is needed", self.m()),
            ))
        } else {
            Ok(())
        }
    }
}

/// `0!, 1!, …, n!`.
fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = Vec::with_capacity(n + 1);
    f.push(BigInt::one());
    for i in 1..=n {
        let next = &f[i - 1] * BigInt::from(i);
        f.push(next);
    }
    f
}

/// Generates `k_1..k_m` from `k_j = j·j! − Σ_{i=1}^{j−1} i!·k_{j−i}`.
pub fn k_constants(m: usize) -> Result<KTable> {
    if m < 1 {
        return Err(Error::domain("k_constants", "m must be at least 1"));
    }
    let fact = factorials(m);
    let mut k: Vec<BigInt> = Vec::with_capacity(m);
    for j in 1..=m {
        let mut v = BigInt::from(j) * &fact[j];
        for i in 1..j {
            v -= &fact[i] * &k[j - i - 1];
        }
        k.push(v);
    }
    Ok(KTable { values: k })
}

/// True iff `Σ_{i=0}^{j−1} i!·k_{j−i} = j·j!` holds exactly for every `j ≤ m`.
pub fn verify_recurrence(k: &KTable) -> bool {
    let m = k.m();
    let fact = factorials(m);
    (1..=m).all(|j| {
        let lhs = (0..j).fold(BigInt::zero(), |acc, i| acc + &fact[i] * &k.values[j - i - 1]);
        lhs == BigInt::from(j) * &fact[j]
    })
}

/// True iff every entry is at least one.
pub fn all_positive(k: &KTable) -> bool {
    k.values.iter().all(|v| v.is_positive())
}
