//! Gauss–Kuzmin targets: cylinder intervals, the Gauss measure and the Lévy constant.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cfe::{continuant, format_digits, parse_digits};
use crate::error::{Error, Result};

/// A digit pattern `w = (w₁,…,w_k)` searched for inside expansions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Window(Vec<u64>);

impl Window {
    pub fn new(word: Vec<u64>) -> Result<Self> {
        if word.is_empty() || word.contains(&0) {
            return Err(Error::InvalidParameter(
                "window must be a nonempty string of positive integers".into(),
            ));
        }
        Ok(Self(word))
    }

    pub fn single(a: u64) -> Result<Self> {
        Self::new(vec![a])
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// `w·a`, the window extended by one digit.
    pub fn extended(&self, a: u64) -> Self {
        let mut v = self.0.clone();
        v.push(a);
        Self(v)
    }
}

impl TryFrom<Vec<u64>> for Window {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Window> for Vec<u64> {
    fn from(w: Window) -> Self {
        w.0
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digits(&self.0))
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_digits(s)?)
    }
}

/// An exact rational endpoint `num/den` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub num: u64,
    pub den: u64,
}

impl Endpoint {
    pub const ZERO: Endpoint = Endpoint { num: 0, den: 1 };
    pub const ONE: Endpoint = Endpoint { num: 1, den: 1 };

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `lo < hi` with exact rational endpoints. Openness of the ends is irrelevant for
/// measures and is not tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalInterval {
    lo: Endpoint,
    hi: Endpoint,
}

impl RationalInterval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Result<Self> {
        let valid = lo.den > 0
            && hi.den > 0
            && hi.num <= hi.den
            && (lo.num as u128) * (hi.den as u128) < (hi.num as u128) * (lo.den as u128);
        if !valid {
            return Err(Error::InvalidParameter(format!(
                "[{lo}, {hi}] is not a subinterval of [0,1]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub const UNIT: RationalInterval = RationalInterval {
        lo: Endpoint::ZERO,
        hi: Endpoint::ONE,
    };

    pub fn lo(&self) -> Endpoint {
        self.lo
    }

    pub fn hi(&self) -> Endpoint {
        self.hi
    }

    /// Whether `num/den` lies strictly inside.
    pub fn contains_strictly(&self, num: u64, den: u64) -> bool {
        let (n, d) = (num as u128, den as u128);
        (self.lo.num as u128) * d < n * (self.lo.den as u128)
            && n * (self.hi.den as u128) < (self.hi.num as u128) * d
    }
}

/// The interval `I_w` of numbers whose expansion starts with `w`: endpoints
/// `[w₁,…,w_k]` and `[w₁,…,w_k + 1]`, ordered.
pub fn cylinder_interval(w: &Window) -> Result<RationalInterval> {
    let (p1, q1) = continuant(w.as_slice())?;
    let mut bumped = w.as_slice().to_vec();
    let last = bumped.last_mut().expect("nonempty window");
    *last = last.checked_add(1).ok_or(Error::Overflow("window digit"))?;
    let (p2, q2) = continuant(&bumped)?;
    let a = Endpoint { num: p1, den: q1 };
    let b = Endpoint { num: p2, den: q2 };
    // odd k: [w] > [w+1]; even k: the reverse
    if (p1 as u128) * (q2 as u128) < (p2 as u128) * (q1 as u128) {
        RationalInterval::new(a, b)
    } else {
        RationalInterval::new(b, a)
    }
}

/// `ν_Gauss(I) = log₂((1+hi)/(1+lo))`.
///
/// Evaluated as `log₂(1 + δ)` with `δ = (hi − lo)/(1 + lo)` formed from exact integer
/// cross products, so narrow cylinders keep full relative precision.
pub fn gauss_measure(interval: &RationalInterval) -> f64 {
    let (lo, hi) = (interval.lo, interval.hi);
    // (hi - lo) / (1 + lo) = (hn·ld − ln·hd) / (hd·(ld + ln))
    let num = (hi.num as u128) * (lo.den as u128) - (lo.num as u128) * (hi.den as u128);
    let den = (hi.den as u128) * (lo.den as u128 + lo.num as u128);
    let delta = num as f64 / den as f64;
    delta.ln_1p() / LN_2
}

/// The Gauss–Kuzmin density `D_w = ν_Gauss(I_w)`.
pub fn target_density(w: &Window) -> Result<f64> {
    Ok(gauss_measure(&cylinder_interval(w)?))
}

/// Closed form for a single digit, `log₂(1 + 1/(a(a+2)))`.
pub fn single_digit_density(a: u64) -> f64 {
    let a = a as f64;
    (1.0 / (a * (a + 2.0))).ln_1p() / LN_2
}

/// `12 log 2 / π²`, the limiting ratio `len(j/q) / log q`.
pub fn levy_constant() -> f64 {
    12.0 * LN_2 / (PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[u64]) -> Window {
        Window::new(v.to_vec()).unwrap()
    }

    fn ep(num: u64, den: u64) -> Endpoint {
        Endpoint { num, den }
    }

    #[test]
    fn cylinder_examples() {
        let i = cylinder_interval(&w(&[1])).unwrap();
        assert_eq!((i.lo(), i.hi()), (ep(1, 2), ep(1, 1)));
        let i = cylinder_interval(&w(&[2])).unwrap();
        assert_eq!((i.lo(), i.hi()), (ep(1, 3), ep(1, 2)));
        let i = cylinder_interval(&w(&[1, 2])).unwrap();
        assert_eq!((i.lo(), i.hi()), (ep(2, 3), ep(3, 4)));
    }

    #[test]
    fn gauss_measure_examples() {
        let half = RationalInterval::new(ep(1, 2), ep(1, 1)).unwrap();
        assert!((gauss_measure(&half) - (2.0 - 3f64.log2())).abs() < 1e-15);
        assert!((gauss_measure(&half) - 0.4150375).abs() < 1e-7);
        assert!((gauss_measure(&RationalInterval::UNIT) - 1.0).abs() < 1e-15);
        let i = RationalInterval::new(ep(2, 3), ep(3, 4)).unwrap();
        assert!((gauss_measure(&i) - (21.0f64 / 20.0).log2()).abs() < 1e-15);
        assert!((gauss_measure(&i) - 0.0703893).abs() < 1e-7);
    }

    #[test]
    fn target_density_examples() {
        assert!((target_density(&w(&[1])).unwrap() - 0.4150375).abs() < 1e-7);
        assert!((target_density(&w(&[1, 2])).unwrap() - 0.0703893).abs() < 1e-7);
        for a in [1, 2, 3, 17, 1000] {
            let d = target_density(&w(&[a])).unwrap();
            let closed = (1.0 / ((a * (a + 2)) as f64)).ln_1p() / LN_2;
            assert!((d - closed).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn levy_constant_value() {
        let c = levy_constant();
        assert!((c - 0.8427659).abs() < 1e-7);
        assert!(c > 0.84 && c < 0.85);
        assert!((c * PI * PI / 12.0 - LN_2).abs() < 1e-15);
    }

    #[test]
    fn single_digit_closed_form_up_to_a_million() {
        let mut a = 1u64;
        while a <= 1_000_000 {
            let exact = target_density(&w(&[a])).unwrap();
            let closed = single_digit_density(a);
            assert!(
                (exact - closed).abs() <= 1e-12 * closed,
                "a={a}: {exact} vs {closed}"
            );
            a = if a < 1000 { a + 1 } else { a * 3 / 2 + 1 };
        }
        assert!((target_density(&w(&[1_000_000])).unwrap() - single_digit_density(1_000_000))
            .abs()
            <= 1e-12 * single_digit_density(1_000_000));
    }

    #[test]
    fn normalization_partial_sums() {
        // Σ_{a ≤ A} D_(a) = log₂((1+1)/(1+1/(A+1))) telescopes to 1 − log₂(1 + 1/(A+1))
        for big_a in [10u64, 1000, 100_000] {
            let s: f64 = (1..=big_a).map(single_digit_density).sum();
            let expected = 1.0 - (1.0 / (big_a as f64 + 1.0)).ln_1p() / LN_2;
            assert!((s - expected).abs() < 1e-10, "A={big_a}");
            assert!(s < 1.0);
        }
    }

    #[test]
    fn cylinder_endpoints_are_farey_neighbors() {
        for word in [vec![1], vec![3, 1, 4], vec![1, 1, 1, 1], vec![7, 2], vec![2, 9, 9, 1, 5]] {
            let i = cylinder_interval(&w(&word)).unwrap();
            let det = (i.lo().num as i128) * (i.hi().den as i128)
                - (i.hi().num as i128) * (i.lo().den as i128);
            assert_eq!(det.abs(), 1, "{word:?}");
        }
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(vec![]).is_err());
        assert!(Window::new(vec![1, 0]).is_err());
        assert_eq!("1,2".parse::<Window>().unwrap(), w(&[1, 2]));
    }

    #[test]
    fn interval_validation() {
        assert!(RationalInterval::new(ep(1, 2), ep(1, 3)).is_err());
        assert!(RationalInterval::new(ep(1, 2), ep(3, 2)).is_err());
        let i = RationalInterval::new(ep(1, 3), ep(1, 2)).unwrap();
        assert!(i.contains_strictly(2, 5));
        assert!(!i.contains_strictly(1, 2));
    }
}
