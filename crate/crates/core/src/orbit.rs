//! Diagonal-flow diagnostics on the space of unimodular planar lattices.
//!
//! For `x = u_{p/q} ℤ²` the lattice `a_t x` consists of the vectors
//! `(e^{t/2}(m + n p/q), e^{−t/2} n)`. Its shortest vector is always one of the
//! convergent vectors `(q_k p/q − p_k, q_k)` (including the seeds `(−1, 0)` and
//! `(p/q, 1)`), since a vector that is not a relative minimum is beaten in both
//! coordinates by another. Each candidate has squared length
//! `e^t x² + e^{−t} y²`, so both the profile of
//! `α₁(t) = 1 / min ‖v(t)‖` and the excursion sets `{α₁ > M}` have exact closed forms.
//!
//! The reduction oracle in [`crate::lattice`] cross-checks the candidate family.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cfe::{convergents, gcd, neg_mod_inverse, ReducedFraction, MAX_SCAN_MODULUS};
use crate::error::{Error, Result};
use crate::lattice::{gauss_reduce, Vec2};
use crate::stats::{realize_ensemble, EnsembleSpec};

/// `(4/3)^{−1/4}`: every unimodular planar lattice has `α₁ ≥` this.
pub fn hermite_alpha_floor() -> f64 {
    (0.75f64).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub p: u64,
    pub q: u64,
    pub horizon: f64,
}

impl OrbitSpec {
    /// `horizon` defaults to `2 log q`.
    pub fn new(p: u64, q: u64, horizon: Option<f64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
        }
        if q > MAX_SCAN_MODULUS {
            return Err(Error::Overflow("modulus exceeds 2^31"));
        }
        if p == 0 || p >= q || gcd(p, q) != 1 {
            return Err(Error::NotCoprime { value: p, modulus: q });
        }
        let horizon = horizon.unwrap_or_else(|| 2.0 * (q as f64).ln());
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon {horizon} must be > 0")));
        }
        Ok(Self { p, q, horizon })
    }
}

/// A vector of `u_{p/q} ℤ²` at time 0: `x = r/q` with exact integer `r`, and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub r: i64,
    pub y: u64,
    q: u64,
}

impl Candidate {
    pub fn x(&self) -> f64 {
        self.r as f64 / self.q as f64
    }

    /// `‖a_t v‖² = e^t x² + e^{−t} y²`.
    #[inline]
    pub fn norm_sq(&self, t: f64) -> f64 {
        let x = self.x();
        let y = self.y as f64;
        t.exp() * x * x + (-t).exp() * y * y
    }

    /// `−½ log ‖a_t v‖²`, the candidate's contribution to `log α₁`.
    #[inline]
    pub fn log_inv_len(&self, t: f64) -> f64 {
        -0.5 * self.norm_sq(t).ln()
    }

    /// Open time interval on which `‖a_t v‖ < 1/M`, if nonempty.
    fn below(&self, m: f64) -> Option<(f64, f64)> {
        let c = 1.0 / (m * m);
        let x = self.x();
        let y = self.y as f64;
        match (self.r == 0, self.y == 0) {
            (true, true) => None,
            (true, false) => Some((2.0 * (y * m).ln(), f64::INFINITY)),
            (false, true) => Some((f64::NEG_INFINITY, (c / (x * x)).ln())),
            (false, false) => {
                // x² u² − c u + y² < 0 with u = e^t
                let disc = c * c - 4.0 * x * x * y * y;
                if disc <= 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let u_lo = 2.0 * y * y / (c + sq);
                let u_hi = (c + sq) / (2.0 * x * x);
                Some((u_lo.ln(), u_hi.ln()))
            }
        }
    }
}

/// The Pareto-minimal convergent vectors of `p/q`, ordered by increasing `y`
/// (hence strictly decreasing `|x|`).
pub fn candidate_vectors(p: u64, q: u64) -> Result<Vec<Candidate>> {
    let digits: Vec<u64> = ReducedFraction::new(p, q)?.digits().collect();
    let conv = convergents(&digits)?;
    let mut all: Vec<Candidate> = conv
        .with_seeds()
        .map(|(pk, qk)| Candidate {
            r: (qk as i128 * p as i128 - pk as i128 * q as i128) as i64,
            y: qk,
            q,
        })
        .collect();
    all.sort_by(|a, b| a.y.cmp(&b.y).then(a.r.unsigned_abs().cmp(&b.r.unsigned_abs())));
    let mut front: Vec<Candidate> = Vec::with_capacity(all.len());
    for c in all {
        if let Some(last) = front.last() {
            if c.r.unsigned_abs() >= last.r.unsigned_abs() {
                continue;
            }
        }
        front.push(c);
    }
    Ok(front)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Index into [`OrbitProfile::candidates`] of the shortest vector on this segment.
    pub active: usize,
}

/// `t ↦ α₁(a_t u_{p/q} ℤ²)` on `[0, T]`, piecewise given by one active candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitProfile {
    pub spec: OrbitSpec,
    pub candidates: Vec<Candidate>,
    pub segments: Vec<Segment>,
}

/// Time after which candidate `j` is shorter than candidate `i < j`.
fn crossing_time(ci: &Candidate, cj: &Candidate) -> f64 {
    // e^{2τ} = (y_j² − y_i²) / (x_i² − x_j²), with x = r/q
    let dy = (cj.y as i128).pow(2) - (ci.y as i128).pow(2);
    let dr = (ci.r as i128).pow(2) - (cj.r as i128).pow(2);
    0.5 * ((dy as f64).ln() - (dr as f64).ln() + 2.0 * (ci.q as f64).ln())
}

pub fn alpha1_profile(spec: &OrbitSpec) -> Result<OrbitProfile> {
    let candidates = candidate_vectors(spec.p, spec.q)?;
    let horizon = spec.horizon;
    let mut cur = argmin_at(&candidates, 0.0);
    let mut t = 0.0;
    let mut segments = Vec::new();
    loop {
        let next = (cur + 1..candidates.len())
            .map(|j| (crossing_time(&candidates[cur], &candidates[j]), j))
            .fold(None, |best: Option<(f64, usize)>, (tau, j)| match best {
                Some((bt, _)) if tau > bt => best,
                _ => Some((tau, j)),
            });
        match next {
            Some((tau, j)) if tau < horizon => {
                let tau = tau.max(t);
                if tau > t {
                    segments.push(Segment {
                        start: t,
                        end: tau,
                        active: cur,
                    });
                }
                t = tau;
                cur = j;
            }
            _ => {
                segments.push(Segment {
                    start: t,
                    end: horizon,
                    active: cur,
                });
                break;
            }
        }
    }
    Ok(OrbitProfile {
        spec: *spec,
        candidates,
        segments,
    })
}

fn argmin_at(candidates: &[Candidate], t: f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let v = c.norm_sq(t);
        if v <= best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

impl OrbitProfile {
    /// `0 = t₀ < t₁ < … < t_m = T`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        b.push(self.spec.horizon);
        b
    }

    /// `log α₁(t)`; inside `[0, T]` from the active segment, outside by a full
    /// maximum over the candidates.
    pub fn log_alpha1(&self, t: f64) -> f64 {
        if (0.0..=self.spec.horizon).contains(&t) {
            let i = self
                .segments
                .partition_point(|s| s.end < t)
                .min(self.segments.len() - 1);
            self.candidates[self.segments[i].active].log_inv_len(t)
        } else {
            self.candidates
                .iter()
                .map(|c| c.log_inv_len(t))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    }

    pub fn alpha1(&self, t: f64) -> f64 {
        self.log_alpha1(t).exp()
    }

    /// `(t, α₁(t))` on the grid `0, step, 2·step, …` up to and including `T`.
    pub fn sample(&self, step: f64) -> Vec<(f64, f64)> {
        grid_times(self.spec.horizon, step)
            .map(|t| (t, self.alpha1(t)))
            .collect()
    }

    /// `#breakpoints:` comment, `t,alpha1` header, then sampled rows.
    pub fn write_csv<W: Write>(&self, mut out: W, step: f64) -> io::Result<()> {
        let bps = self
            .breakpoints()
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "#breakpoints: {bps}")?;
        writeln!(out, "t,alpha1")?;
        for (t, a) in self.sample(step) {
            writeln!(out, "{t},{a}")?;
        }
        Ok(())
    }
}

fn grid_times(horizon: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = (horizon / step).floor() as u64;
    (0..=n).map(move |i| i as f64 * step)
}

/// Merged open intervals of `{t ∈ [t0, t1] : α₁(a_t u_{p/q} ℤ²) > M}`.
pub fn excursion_intervals(candidates: &[Candidate], m: f64, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let mut raw: Vec<(f64, f64)> = candidates
        .iter()
        .filter_map(|c| c.below(m))
        .map(|(a, b)| (a.max(t0), b.min(t1)))
        .filter(|(a, b)| a < b)
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (a, b) in raw {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Lebesgue measure of `{t ∈ [t0, t1] : α₁ > M}`.
pub fn excursion_measure(candidates: &[Candidate], m: f64, t0: f64, t1: f64) -> f64 {
    excursion_intervals(candidates, m, t0, t1)
        .iter()
        .fold(0.0, |acc, (a, b)| acc + (b - a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionSummary {
    pub threshold: f64,
    pub horizon: f64,
    /// `δ^{[0,T]}(X^{>M})`, exact up to rounding.
    pub fraction_above: f64,
    pub intervals: Vec<(f64, f64)>,
    /// Fraction of grid points with `α₁ > M`; validation only.
    pub sampled_fraction: f64,
    pub grid: f64,
}

pub fn excursion_fraction(spec: &OrbitSpec, m: f64, grid: f64) -> Result<ExcursionSummary> {
    check_threshold(m)?;
    if !(grid > 0.0 && grid.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid {grid} must be > 0")));
    }
    let profile = alpha1_profile(spec)?;
    let intervals = excursion_intervals(&profile.candidates, m, 0.0, spec.horizon);
    let measure = intervals.iter().fold(0.0, |acc, (a, b)| acc + (b - a));
    let log_m = m.ln();
    let (mut hits, mut total) = (0u64, 0u64);
    for t in grid_times(spec.horizon, grid) {
        total += 1;
        if profile.log_alpha1(t) > log_m {
            hits += 1;
        }
    }
    Ok(ExcursionSummary {
        threshold: m,
        horizon: spec.horizon,
        fraction_above: (measure / spec.horizon).clamp(0.0, 1.0),
        intervals,
        sampled_fraction: hits as f64 / total as f64,
        grid,
    })
}

fn check_threshold(m: f64) -> Result<()> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::InvalidParameter(format!("threshold {m} must be > 0")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualResidual {
    pub threshold: f64,
    /// Fraction above `M` over `[0, 2 log q]` at `p/q`.
    pub lhs: f64,
    /// `½·(fraction over [0, log q] at p/q) + ½·(fraction over [0, log q] at p′/q)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Checks the time-reversal symmetry of the orbit segment `[0, 2 log q]`: the second
/// half at `p/q` is the dual (a quarter turn) of the first half at `p′/q`, where
/// `p·p′ ≡ −1 (mod q)`, and `α₁` is invariant under that rotation.
pub fn dual_orbit_identity(
    p: u64,
    q: u64,
    thresholds: &[f64],
    grid: f64,
) -> Result<Vec<DualResidual>> {
    let p_dual = neg_mod_inverse(p, q)?;
    let log_q = (q as f64).ln();
    let full = OrbitSpec::new(p, q, Some(2.0 * log_q))?;
    let half = OrbitSpec::new(p, q, Some(log_q))?;
    let half_dual = OrbitSpec::new(p_dual, q, Some(log_q))?;
    thresholds
        .iter()
        .map(|&m| {
            let lhs = excursion_fraction(&full, m, grid)?.fraction_above;
            let a = excursion_fraction(&half, m, grid)?.fraction_above;
            let b = excursion_fraction(&half_dual, m, grid)?.fraction_above;
            let rhs = 0.5 * a + 0.5 * b;
            Ok(DualResidual {
                threshold: m,
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            })
        })
        .collect()
}

/// Retained mass `δ^{[0, 2 log q]}_{Λ_q}(X^{≤M})` averaged over the ensemble.
///
/// Per-orbit fractions are exact; they are collected in residue order and summed
/// sequentially so the result does not depend on the worker count. `grid` is not
/// used by the exact computation and only travels with the result.
pub fn ensemble_mass(spec: &EnsembleSpec, m: f64, grid: f64) -> Result<MassRow> {
    check_threshold(m)?;
    let residues = realize_ensemble(spec)?;
    let q = spec.q;
    let horizon = 2.0 * (q as f64).ln();
    let retained: Vec<f64> = residues
        .par_iter()
        .map(|&j| {
            let cands = candidate_vectors(j, q)?;
            let above = excursion_measure(&cands, m, 0.0, horizon) / horizon;
            Ok(1.0 - above.clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    let total: f64 = retained.iter().sum();
    Ok(MassRow {
        q,
        threshold: m,
        retained_mass: total / residues.len() as f64,
        n_orbits: residues.len() as u64,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub q: u64,
    #[serde(rename = "M")]
    pub threshold: f64,
    pub retained_mass: f64,
    pub n_orbits: u64,
    pub grid: f64,
}

impl MassRow {
    pub const CSV_HEADER: &'static str = "q,M,retained_mass,n_orbits,grid";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{}",
            self.q, self.threshold, self.retained_mass, self.n_orbits, self.grid
        )
    }
}

/// Haar mass of `X^{≤M}` for `M ≥ 1` from Siegel's mean value theorem: at most one
/// pair `±v` of primitive vectors is shorter than `1/M ≤ 1`, so
/// `μ(α₁ > M) = π M^{−2} / (2 ζ(2)) = 3/(π M²)`.
pub fn siegel_retained_mass(m: f64) -> Option<f64> {
    (m >= 1.0).then(|| 1.0 - 3.0 / (std::f64::consts::PI * m * m))
}

/// Parameters of the Monte Carlo Haar reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarOracle {
    pub n_points: usize,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for HaarOracle {
    fn default() -> Self {
        Self {
            n_points: 1000,
            horizon: 1.0e4,
            step: 0.05,
            seed: 0x5eed_cafe,
        }
    }
}

impl HaarOracle {
    /// Long-horizon time average of `1{α₁ ≤ M}` along `a_t u_s ℤ²`, averaged over
    /// uniformly random starting points `s`.
    ///
    /// Each orbit is advanced in steps of `step`, with the basis Lagrange–Gauss
    /// reduced after every step; this uses none of the convergent machinery.
    pub fn retained_mass(&self, m: f64) -> Result<f64> {
        check_threshold(m)?;
        if self.n_points == 0 || self.horizon.is_nan() || self.horizon <= 0.0 || self.step.is_nan() || self.step <= 0.0 {
            return Err(Error::InvalidParameter("empty Haar oracle".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        let starts: Vec<f64> = (0..self.n_points).map(|_| rng.gen::<f64>()).collect();
        let fractions: Vec<f64> = starts
            .par_iter()
            .map(|&s| time_fraction_below(s, m, self.horizon, self.step))
            .collect();
        Ok(fractions.iter().sum::<f64>() / self.n_points as f64)
    }
}

fn time_fraction_below(s: f64, m: f64, horizon: f64, step: f64) -> f64 {
    let mut b1: Vec2 = [1.0, 0.0];
    let mut b2: Vec2 = [s, 1.0];
    let (ex, ey) = ((step / 2.0).exp(), (-step / 2.0).exp());
    let steps = (horizon / step).round() as u64;
    let limit_sq = 1.0 / (m * m);
    let mut below = 0u64;
    for i in 0..steps {
        b1 = [b1[0] * ex, b1[1] * ey];
        b2 = [b2[0] * ex, b2[1] * ey];
        gauss_reduce(&mut b1, &mut b2);
        // α₁ ≤ M ⇔ shortest length ≥ 1/M
        if b1[0] * b1[0] + b1[1] * b1[1] >= limit_sq {
            below += 1;
        }
        if i % 1024 == 1023 {
            let det = (b1[0] * b2[1] - b1[1] * b2[0]).abs();
            let scale = det.sqrt().recip();
            b1 = [b1[0] * scale, b1[1] * scale];
            b2 = [b2[0] * scale, b2[1] * scale];
        }
    }
    below as f64 / steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::orbit_shortest_sq;

    fn spec(p: u64, q: u64, t: Option<f64>) -> OrbitSpec {
        OrbitSpec::new(p, q, t).unwrap()
    }

    #[test]
    fn alpha1_half_at_zero() {
        let prof = alpha1_profile(&spec(1, 2, None)).unwrap();
        assert!((prof.alpha1(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha1_at_two_log_q_at_least_one() {
        for (p, q) in [(1, 2), (3, 7), (5, 13), (123, 1009), (4567, 10007)] {
            let prof = alpha1_profile(&spec(p, q, None)).unwrap();
            let t = 2.0 * (q as f64).ln();
            assert!(prof.alpha1(t) >= 1.0 - 1e-12, "{p}/{q}");
        }
    }

    #[test]
    fn divergence_into_cusp() {
        for (p, q) in [(3u64, 7u64), (100, 1009), (1, 2)] {
            let prof = alpha1_profile(&spec(p, q, None)).unwrap();
            let lq = (q as f64).ln();
            for t in [4.0 * lq, 8.0 * lq, 60.0] {
                let gap = prof.log_alpha1(t) - t / 2.0;
                assert!(gap >= -lq - 1e-12, "{p}/{q} t={t}");
            }
            // log α₁ − t/2 → −log q
            let far = prof.log_alpha1(80.0) - 40.0;
            assert!((far + lq).abs() < 1e-9);
        }
    }

    #[test]
    fn short_window_stays_below_two() {
        let s = spec(1, 2, Some(2.0 * 2f64.ln()));
        let e = excursion_fraction(&s, 2.0, 1e-3).unwrap();
        assert_eq!(e.fraction_above, 0.0);
        assert!(e.intervals.is_empty());
    }

    #[test]
    fn below_hermite_floor_everything_is_above() {
        let s = spec(3, 7, None);
        let e = excursion_fraction(&s, 0.9, 1e-3).unwrap();
        assert!((e.fraction_above - 1.0).abs() < 1e-12);
        assert_eq!(e.sampled_fraction, 1.0);
        let e = excursion_fraction(&s, 1e9, 1e-3).unwrap();
        assert_eq!(e.fraction_above, 0.0);
    }

    #[test]
    fn candidate_family_matches_reduction() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..40 {
            let q = rng.gen_range(2..20_000u64);
            let p = rng.gen_range(1..q);
            if gcd(p, q) != 1 {
                continue;
            }
            let prof = alpha1_profile(&spec(p, q, Some(4.0 * (q as f64).ln()))).unwrap();
            for _ in 0..200 {
                let t = rng.gen_range(0.0..prof.spec.horizon);
                let from_profile = 1.0 / prof.alpha1(t);
                let oracle = orbit_shortest_sq(p, q, t).sqrt();
                assert!(
                    (from_profile - oracle).abs() <= 1e-9 * oracle,
                    "{p}/{q} t={t}: {from_profile} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn profile_is_continuous_and_lipschitz() {
        let prof = alpha1_profile(&spec(4567, 10007, None)).unwrap();
        for s in &prof.segments[1..] {
            let c_prev = prof.candidates[prof.segments.iter().find(|x| x.end == s.start).unwrap().active];
            let c_next = prof.candidates[s.active];
            let a = c_prev.log_inv_len(s.start);
            let b = c_next.log_inv_len(s.start);
            assert!((a - b).abs() < 1e-9);
        }
        let samples = prof.sample(1e-3);
        for w in samples.windows(2) {
            let (t0, a0) = w[0];
            let (t1, a1) = w[1];
            assert!((a1.ln() - a0.ln()).abs() <= (t1 - t0) / 2.0 + 1e-12);
            assert!(a0 >= hermite_alpha_floor() - 1e-12);
        }
    }

    #[test]
    fn exact_fraction_agrees_with_sampling() {
        for (p, q) in [(1u64, 13u64), (2, 7), (700, 1009), (9, 10007)] {
            for m in [1.0, 1.5, 3.0] {
                let e = excursion_fraction(&spec(p, q, None), m, 1e-3).unwrap();
                let slack = (2 * e.intervals.len() + 2) as f64 * e.grid / e.horizon;
                assert!(
                    (e.fraction_above - e.sampled_fraction).abs() <= slack,
                    "{p}/{q} M={m}: {} vs {}",
                    e.fraction_above,
                    e.sampled_fraction
                );
            }
        }
    }

    #[test]
    fn dual_identity_small_cases() {
        for r in dual_orbit_identity(2, 7, &[0.5, 1.0, 1.2, 2.0, 5.0], 1e-3).unwrap() {
            assert!(r.residual <= 2e-3, "{r:?}");
        }
        // p² ≡ −1 (mod 5): the dual numerator is p itself
        assert_eq!(neg_mod_inverse(2, 5).unwrap(), 2);
        for r in dual_orbit_identity(2, 5, &[1.0, 1.1], 1e-3).unwrap() {
            assert!(r.residual <= 2e-3);
        }
        for r in dual_orbit_identity(3, 11, &[0.5], 1e-3).unwrap() {
            assert_eq!((r.lhs, r.rhs, r.residual), (1.0, 1.0, 0.0));
        }
    }

    #[test]
    fn ensemble_mass_limits() {
        let s = EnsembleSpec::new(crate::stats::EnsembleKind::All, 101);
        assert_eq!(ensemble_mass(&s, 0.9, 1e-3).unwrap().retained_mass, 0.0);
        assert!((ensemble_mass(&s, 1e12, 1e-3).unwrap().retained_mass - 1.0).abs() < 1e-12);
        let a = ensemble_mass(&s, 2.0, 1e-3).unwrap().retained_mass;
        let b = ensemble_mass(&s, 5.0, 1e-3).unwrap().retained_mass;
        assert!(a <= b);
    }

    #[test]
    fn spec_validation() {
        assert!(OrbitSpec::new(2, 4, None).is_err());
        assert!(OrbitSpec::new(0, 4, None).is_err());
        assert!(OrbitSpec::new(1, 1, None).is_err());
        assert!(OrbitSpec::new(1, 3, Some(-1.0)).is_err());
        assert!((spec(1, 3, None).horizon - 2.0 * 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn siegel_values() {
        assert!((siegel_retained_mass(5.0).unwrap() - (1.0 - 3.0 / (25.0 * std::f64::consts::PI))).abs() < 1e-15);
        assert!(siegel_retained_mass(0.5).is_none());
    }

    #[test]
    fn mass_csv_row() {
        let mut buf = Vec::new();
        MassRow {
            q: 7,
            threshold: 5.0,
            retained_mass: 0.5,
            n_orbits: 6,
            grid: 0.001,
        }
        .write_csv(&mut buf)
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "7,5,0.5,6,0.001\n");
    }
}
