//! Bounded partial quotients: k-Zaremba numerators, per-denominator counts,
//! prime-numerator conjecture scans and continuant-tree counting.
//!
//! Only the canonical expansion is tested against the bound. `5/6 = [1,5]` is not
//! 4-Zaremba even though its long form `[1,4,1]` is.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cfe::{gcd, Digits, ReducedFraction, MAX_INT, MAX_SCAN_MODULUS};
use crate::error::{Error, Result};
use crate::primes::PrimeSieve;

/// Whether every canonical digit of `f` is at most `k`.
pub fn is_k_zaremba(f: ReducedFraction, k: u64) -> bool {
    f.digits().all(|a| a <= k)
}

/// [`is_k_zaremba`] for `j/q` without constructing a fraction; stops at the first
/// digit above `k`.
#[inline]
fn bounded_digits(j: u64, q: u64, k: u64) -> bool {
    // first digit a₁ = ⌊q/j⌋ ≤ k  ⇔  j·(k+1) > q
    if (j as u128) * (k as u128 + 1) <= q as u128 {
        return false;
    }
    let mut it = digits_of(j, q);
    it.all(|a| a <= k)
}

fn digits_of(j: u64, q: u64) -> Digits {
    // j, q coprime and 0 < j < q: checked by every caller
    ReducedFraction::new_unchecked(j, q).digits()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZarembaRow {
    pub q: u64,
    pub k: u64,
    pub count_all: u64,
    pub count_prime: u64,
    /// Smallest prime k-Zaremba numerator.
    pub witness_prime: Option<u64>,
    /// `log count_all / log q`, absent when the count is zero.
    pub ratio_all: Option<f64>,
    pub ratio_prime: Option<f64>,
}

impl ZarembaRow {
    pub const CSV_HEADER: &'static str =
        "q,k,count_all,count_prime,witness_prime,ratio_all,ratio_prime";

    /// Absent values are written as empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            self.q,
            self.k,
            self.count_all,
            self.count_prime,
            opt(self.witness_prime),
            opt(self.ratio_all),
            opt(self.ratio_prime)
        )
    }
}

fn log_ratio(count: u64, q: u64) -> Option<f64> {
    (count > 0).then(|| (count as f64).ln() / (q as f64).ln())
}

fn check_scan_args(q: u64, k: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("denominator {q} < 2")));
    }
    if q > MAX_SCAN_MODULUS {
        return Err(Error::Overflow("denominator exceeds 2^31"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("digit bound must be >= 1".into()));
    }
    Ok(())
}

/// Counts k-Zaremba numerators of `q` (all, and prime) using a sieve covering `[0, q)`.
pub fn scan_denominator_with(q: u64, k: u64, sieve: &PrimeSieve) -> Result<ZarembaRow> {
    check_scan_args(q, k)?;
    let mut count_all = 0;
    let mut count_prime = 0;
    let mut witness_prime = None;
    for j in 1..q {
        if gcd(j, q) != 1 || !bounded_digits(j, q, k) {
            continue;
        }
        count_all += 1;
        if sieve.is_prime(j) {
            count_prime += 1;
            witness_prime.get_or_insert(j);
        }
    }
    Ok(ZarembaRow {
        q,
        k,
        count_all,
        count_prime,
        witness_prime,
        ratio_all: log_ratio(count_all, q),
        ratio_prime: log_ratio(count_prime, q),
    })
}

pub fn scan_denominator(q: u64, k: u64) -> Result<ZarembaRow> {
    check_scan_args(q, k)?;
    scan_denominator_with(q, k, &PrimeSieve::new(q))
}

/// Rows for every `q ∈ [q_min, q_max]`, in order. Denominators are processed in parallel.
pub fn scan_range(q_min: u64, q_max: u64, k: u64) -> Result<Vec<ZarembaRow>> {
    check_scan_args(q_min.max(2), k)?;
    check_scan_args(q_max, k)?;
    let sieve = PrimeSieve::new(q_max);
    (q_min.max(2)..=q_max)
        .into_par_iter()
        .map(|q| scan_denominator_with(q, k, &sieve))
        .collect()
}

/// Smallest prime k-Zaremba numerator of `q`, if any.
pub fn prime_witness(q: u64, k: u64, sieve: &PrimeSieve) -> Option<u64> {
    sieve
        .primes_below(q)
        .find(|&p| !q.is_multiple_of(p) && bounded_digits(p, q, k))
}

/// Whether any numerator coprime to `q` is k-Zaremba.
pub fn has_zaremba_numerator(q: u64, k: u64) -> bool {
    (1..q).any(|j| gcd(j, q) == 1 && bounded_digits(j, q, k))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureScan {
    pub q_max: u64,
    pub k: u64,
    pub primes_only: bool,
    pub counterexamples: Vec<u64>,
    /// Denominators with no prime numerator at all (only `q = 2`); not counterexamples.
    pub vacuous: Vec<u64>,
}

/// All `q ∈ (1, q_max]` lacking a k-Zaremba numerator (a prime one when
/// `primes_only`).
pub fn conjecture_scan(q_max: u64, k: u64, primes_only: bool) -> Result<ConjectureScan> {
    check_scan_args(q_max, k)?;
    let sieve = PrimeSieve::new(q_max);
    let flags: Vec<(u64, Option<bool>)> = (2..=q_max)
        .into_par_iter()
        .map(|q| {
            if primes_only {
                if sieve.primes_below(q).all(|p| q % p == 0) {
                    return (q, None);
                }
                (q, Some(prime_witness(q, k, &sieve).is_some()))
            } else {
                (q, Some(has_zaremba_numerator(q, k)))
            }
        })
        .collect();
    let counterexamples = flags
        .iter()
        .filter(|(_, f)| *f == Some(false))
        .map(|(q, _)| *q)
        .collect();
    let vacuous = flags
        .iter()
        .filter(|(_, f)| f.is_none())
        .map(|(q, _)| *q)
        .collect();
    Ok(ConjectureScan {
        q_max,
        k,
        primes_only,
        counterexamples,
        vacuous,
    })
}

/// Deepest possible path in the continuant tree: `q_d ≥ F(d+1)` and `F(93) > 2^63`.
const MAX_DEPTH: usize = 95;

/// `#{(p, q) : gcd(p,q) = 1, 1 ≤ p < q ≤ bound, every canonical digit ≤ k}`, by
/// depth-first traversal of the continuant tree.
///
/// A node holds `(q_{d−1}, q_d)`; appending digit `a` gives `a·q_d + q_{d−1}`. Every
/// node reached by a digit ≥ 2 is the canonical expansion of exactly one counted fraction.
pub fn hensley_count(bound: u64, k: u64) -> Result<u64> {
    if bound < 2 {
        return Err(Error::InvalidParameter(format!("bound {bound} < 2")));
    }
    if bound > MAX_INT {
        return Err(Error::Overflow("bound exceeds i64::MAX"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("digit bound must be >= 1".into()));
    }
    let top = k.min(bound);
    (1..=top)
        .into_par_iter()
        .map(|a1| {
            // root seeds (q₋₁, q₀) = (0, 1); first digit gives q₁ = a₁
            let counted = u64::from(a1 >= 2);
            Ok(counted + subtree_count(1, a1, bound, k)?)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn subtree_count(q_prev: u64, q_cur: u64, bound: u64, k: u64) -> Result<u64> {
    let mut count = 0u64;
    let mut stack: Vec<(u64, u64, usize)> = Vec::with_capacity(MAX_DEPTH * 4);
    stack.push((q_prev, q_cur, 1));
    while let Some((qp, qc, depth)) = stack.pop() {
        if depth >= MAX_DEPTH {
            return Err(Error::Overflow("continuant tree deeper than expected"));
        }
        for a in 1..=k {
            let next = a as u128 * qc as u128 + qp as u128;
            if next > bound as u128 {
                break;
            }
            if a >= 2 {
                count += 1;
            }
            stack.push((qc, next as u64, depth + 1));
        }
    }
    Ok(count)
}
