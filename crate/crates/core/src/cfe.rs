//! Exact continued-fraction kernel for rationals in the open unit interval.
//!
//! A rational `x ∈ (0,1)` has exactly two finite expansions
//! `x = 1/(a₁ + 1/(a₂ + … + 1/aₙ))`; the canonical one never ends in the digit 1.
//! Everything here works on checked `u64` arithmetic bounded by `i64::MAX`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest numerator/denominator accepted anywhere in the crate.
pub const MAX_INT: u64 = i64::MAX as u64;

/// Cap on denominators for ensemble scans; continuants of any expansion with
/// denominator below this fit comfortably in `u64`.
pub const MAX_SCAN_MODULUS: u64 = 1 << 31;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A rational `num/den` in lowest terms with `0 < num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct ReducedFraction {
    num: u64,
    den: u64,
}

impl ReducedFraction {
    /// Rejects anything that is not already reduced; use [`reduce`] to divide out the gcd.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num > MAX_INT || den > MAX_INT {
            return Err(Error::Overflow("fraction component exceeds i64::MAX"));
        }
        if num == 0 || num >= den {
            return Err(Error::OutOfRange { num, den });
        }
        if gcd(num, den) != 1 {
            return Err(Error::NotReduced { num, den });
        }
        Ok(Self { num, den })
    }

    pub(crate) fn new_unchecked(num: u64, den: u64) -> Self {
        debug_assert!(num > 0 && num < den && gcd(num, den) == 1);
        Self { num, den }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn digits(&self) -> Digits {
        Digits {
            num: self.num,
            den: self.den,
        }
    }

    pub fn expand(&self) -> CfDigits {
        expand(*self)
    }

    pub fn mirror(&self) -> Self {
        mirror(*self)
    }
}

impl TryFrom<(u64, u64)> for ReducedFraction {
    type Error = Error;

    fn try_from((num, den): (u64, u64)) -> Result<Self> {
        Self::new(num, den)
    }
}

impl From<ReducedFraction> for (u64, u64) {
    fn from(f: ReducedFraction) -> Self {
        (f.num, f.den)
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for ReducedFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidParameter(format!("expected p/q, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidParameter(format!("{t:?}: {e}")))
        };
        Self::new(parse(n)?, parse(d)?)
    }
}

/// Divides out the common factor of `num/den`; the result must still lie in `(0,1)`.
pub fn reduce(num: u64, den: u64) -> Result<ReducedFraction> {
    if num == 0 || den == 0 {
        return Err(Error::OutOfRange { num, den });
    }
    let g = gcd(num, den);
    ReducedFraction::new(num / g, den / g)
}

/// Allocation-free iterator over the canonical digits of a fraction.
#[derive(Debug, Clone)]
pub struct Digits {
    num: u64,
    den: u64,
}

impl Iterator for Digits {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.num == 0 {
            return None;
        }
        let a = self.den / self.num;
        let r = self.den - a * self.num;
        self.den = self.num;
        self.num = r;
        Some(a)
    }
}

/// Appends the canonical digits of `num/den` to `buf` (which is cleared first).
///
/// No validation: callers guarantee `0 < num < den`. Works for non-coprime input
/// too, yielding the expansion of the reduced fraction.
#[inline]
pub fn expand_into(num: u64, den: u64, buf: &mut Vec<u64>) {
    buf.clear();
    buf.extend(Digits { num, den });
}

/// The canonical digit string `[a₁,…,aₙ]` with `aₙ ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct CfDigits(Vec<u64>);

impl CfDigits {
    /// Validates a canonical digit string: nonempty, every digit ≥ 1, last digit ≥ 2.
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        check_digits(&digits)?;
        if digits.last() == Some(&1) {
            return Err(Error::InvalidDigits(
                "canonical expansion cannot end in 1".into(),
            ));
        }
        Ok(Self(digits))
    }

    /// Folds a trailing 1 into its predecessor: `[…, a, 1] → […, a+1]`.
    pub fn canonicalize(mut digits: Vec<u64>) -> Result<Self> {
        check_digits(&digits)?;
        if digits.last() == Some(&1) {
            if digits.len() == 1 {
                return Err(Error::InvalidDigits("[1] evaluates to 1".into()));
            }
            digits.pop();
            let last = digits.last_mut().expect("len >= 1");
            *last = last
                .checked_add(1)
                .ok_or(Error::Overflow("digit increment"))?;
        }
        Ok(Self(digits))
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn evaluate(&self) -> Result<ReducedFraction> {
        evaluate(&self.0)
    }

    pub fn convergents(&self) -> Result<Convergents> {
        convergents(&self.0)
    }

    /// The other expansion of the same rational, `[a₁,…,aₙ−1, 1]`.
    pub fn long_form(&self) -> Vec<u64> {
        let mut v = self.0.clone();
        *v.last_mut().expect("nonempty") -= 1;
        v.push(1);
        v
    }
}

impl TryFrom<Vec<u64>> for CfDigits {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CfDigits> for Vec<u64> {
    fn from(d: CfDigits) -> Self {
        d.0
    }
}

impl AsRef<[u64]> for CfDigits {
    fn as_ref(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for CfDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digits(&self.0))
    }
}

impl FromStr for CfDigits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_digits(s)?)
    }
}

/// Comma-separated decimal serialization, e.g. `1,1,3`.
pub fn format_digits(digits: &[u64]) -> String {
    let mut out = String::new();
    for (i, d) in digits.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&d.to_string());
    }
    out
}

/// Parses `1,1,3`; does not require canonical form.
pub fn parse_digits(s: &str) -> Result<Vec<u64>> {
    let digits = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidDigits(format!("{t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_digits(&digits)?;
    Ok(digits)
}

fn check_digits(digits: &[u64]) -> Result<()> {
    if digits.is_empty() {
        return Err(Error::InvalidDigits("empty digit string".into()));
    }
    if digits.contains(&0) {
        return Err(Error::InvalidDigits("digits must be positive".into()));
    }
    Ok(())
}

pub fn expand(f: ReducedFraction) -> CfDigits {
    CfDigits(f.digits().collect())
}

/// Raw continuant pair `(p, q)` of `1/(a₁ + 1/(… + 1/aₙ))` without range checks,
/// so `[1]` gives `(1, 1)`.
pub fn continuant(digits: &[u64]) -> Result<(u64, u64)> {
    let (mut p_prev, mut q_prev) = SEED_PREV;
    let (mut p, mut q) = SEED;
    for &a in digits {
        let np = step(a, p, p_prev)?;
        let nq = step(a, q, q_prev)?;
        (p_prev, q_prev, p, q) = (p, q, np, nq);
    }
    Ok((p, q))
}

#[inline]
fn step(a: u64, cur: u64, prev: u64) -> Result<u64> {
    a.checked_mul(cur)
        .and_then(|v| v.checked_add(prev))
        .filter(|&v| v <= MAX_INT)
        .ok_or(Error::Overflow("continuant exceeds i64::MAX"))
}

/// Evaluates any digit string with all digits ≥ 1, canonical or not.
pub fn evaluate(digits: &[u64]) -> Result<ReducedFraction> {
    check_digits(digits)?;
    let (p, q) = continuant(digits)?;
    // continuants are always coprime
    ReducedFraction::new(p, q)
}

/// `(p₋₁, q₋₁)`.
pub const SEED_PREV: (u64, u64) = (1, 0);
/// `(p₀, q₀)`.
pub const SEED: (u64, u64) = (0, 1);

/// Convergents `(pₖ, qₖ)` for `k = 1…n`, built from the seeds [`SEED_PREV`] and [`SEED`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergents {
    pairs: Vec<(u64, u64)>,
}

impl Convergents {
    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn last(&self) -> (u64, u64) {
        *self.pairs.last().expect("at least one digit")
    }

    pub fn denominators(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(_, q)| q)
    }

    /// Seeds followed by the convergents: `(p₋₁,q₋₁), (p₀,q₀), (p₁,q₁), …`.
    pub fn with_seeds(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        [SEED_PREV, SEED].into_iter().chain(self.pairs.iter().copied())
    }
}

pub fn convergents(digits: &[u64]) -> Result<Convergents> {
    check_digits(digits)?;
    let mut pairs = Vec::with_capacity(digits.len());
    let (mut pp, mut qp) = SEED_PREV;
    let (mut p, mut q) = SEED;
    for &a in digits {
        let np = step(a, p, pp)?;
        let nq = step(a, q, qp)?;
        (pp, qp, p, q) = (p, q, np, nq);
        pairs.push((p, q));
    }
    Ok(Convergents { pairs })
}

/// `(den − num)/den`.
pub fn mirror(f: ReducedFraction) -> ReducedFraction {
    ReducedFraction::new_unchecked(f.den - f.num, f.den)
}

/// The unique `p′ ∈ [0, q)` with `p·p′ ≡ −1 (mod q)`.
pub fn neg_mod_inverse(p: u64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
    }
    let inv = mod_inverse(p % q, q).ok_or(Error::NotCoprime { value: p, modulus: q })?;
    Ok((q - inv) % q)
}

/// Extended Euclid; `None` unless `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}
