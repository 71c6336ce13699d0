//! Exact and asymptotic evaluation of `S(x) = Σ_{2≤n≤x} 1/π(n)`.
//!
//! * [`sieve`] computes `π(n)` and the exact sum with compensated summation.
//! * [`li`] evaluates `li x = ∫_2^x dt/log t` two independent ways, plus the
//!   truncated expansions of `li x` and `1/li x`.
//! * [`constants`] generates the integers `k_m` of the `1/li x` expansion.
//! * [`summation`] holds the first-order Euler–Maclaurin formula and the
//!   auxiliary harmonic-type sums with their empirical constants.
//! * [`asymptotics`] evaluates the asymptotic formulas for `S(x)`, fits their
//!   additive constants against the sieve and tabulates the error decay.
//! * [`cli`] wires everything into CSV-emitting subcommands.

pub mod asymptotics;
pub mod cli;
pub mod compensated;
pub mod constants;
pub mod error;
pub mod li;
pub mod quadrature;
pub mod sieve;
pub mod summation;

pub use error::{Error, Result};
