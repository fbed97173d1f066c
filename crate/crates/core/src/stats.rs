//! Numerator ensembles `Λ_q` and the empirical statistics of `D_w(j/q)` and
//! `len(j/q)/log q` over them.
//!
//! All tallies are exact integers; floating-point means are formed once from the
//! final tallies, so the parallel split never changes a report.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cfe::{expand_into, gcd, ReducedFraction, MAX_SCAN_MODULUS};
use crate::error::{Error, Result};
use crate::gauss::{levy_constant, target_density, Window};
use crate::primes::PrimeSieve;

/// How the numerator set `Λ_q ⊆ (ℤ/qℤ)^×` is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    All,
    /// Prime integers `p < q` with `p ∤ q`.
    Primes,
    /// `⌈q^h⌉` residues sampled without replacement (clamped to `φ(q)`).
    RandomSparse { h: f64, seed: u64 },
    Explicit { residues: Vec<u64> },
}

impl EnsembleKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Primes => "primes",
            Self::RandomSparse { .. } => "random",
            Self::Explicit { .. } => "explicit",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All | Self::Primes => f.write_str(self.label()),
            Self::RandomSparse { h, seed } => write!(f, "random:h={h},seed={seed}"),
            Self::Explicit { residues } => {
                write!(f, "explicit:")?;
                for (i, r) in residues.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{r}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `all`, `primes`, `random:h=H,seed=S` or `explicit:r1,r2,…`.
impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized ensemble {s:?}"));
        match s.split_once(':') {
            None if s == "all" => Ok(Self::All),
            None if s == "primes" => Ok(Self::Primes),
            None => Err(bad()),
            Some(("random", rest)) => {
                let (mut h, mut seed) = (None, None);
                for kv in rest.split(',') {
                    match kv.split_once('=') {
                        Some(("h", v)) => h = v.parse::<f64>().ok(),
                        Some(("seed", v)) => seed = v.parse::<u64>().ok(),
                        _ => return Err(bad()),
                    }
                }
                let (h, seed) = h.zip(seed).ok_or_else(bad)?;
                if !(h > 0.0 && h <= 1.0) {
                    return Err(Error::InvalidParameter(format!("h={h} outside (0,1]")));
                }
                Ok(Self::RandomSparse { h, seed })
            }
            Some(("explicit", rest)) => {
                let residues = rest
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Explicit { residues })
            }
            Some(_) => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub q: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, q: u64) -> Self {
        Self { kind, q }
    }

    pub fn realize(&self) -> Result<Vec<u64>> {
        realize_ensemble(self)
    }
}

fn check_modulus(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("modulus {q} < 2")));
    }
    if q > MAX_SCAN_MODULUS {
        return Err(Error::Overflow("modulus exceeds 2^31"));
    }
    Ok(())
}

/// `{1 ≤ j < q : gcd(j, q) = 1}` in increasing order.
pub fn coprime_residues(q: u64) -> Vec<u64> {
    (1..q).filter(|&j| gcd(j, q) == 1).collect()
}

/// Euler's totient by trial factorization.
pub fn totient(mut n: u64) -> u64 {
    let mut phi = n;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            while n.is_multiple_of(d) {
                n /= d;
            }
            phi -= phi / d;
        }
        d += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// Primes `p < q` with `p ∤ q`, using a caller-provided sieve covering `[0, q)`.
pub fn prime_residues_with(q: u64, sieve: &PrimeSieve) -> Vec<u64> {
    sieve.primes_below(q).filter(|&p| !q.is_multiple_of(p)).collect()
}

/// Realizes `Λ_q` as a sorted, duplicate-free list of residues. An empty result is
/// an error.
pub fn realize_ensemble(spec: &EnsembleSpec) -> Result<Vec<u64>> {
    let q = spec.q;
    check_modulus(q)?;
    let set = match &spec.kind {
        EnsembleKind::All => coprime_residues(q),
        EnsembleKind::Primes => prime_residues_with(q, &PrimeSieve::new(q)),
        EnsembleKind::RandomSparse { h, seed } => sparse_sample(q, *h, *seed)?,
        EnsembleKind::Explicit { residues } => {
            let mut out = Vec::with_capacity(residues.len());
            for &r in residues {
                let j = r % q;
                if j == 0 || gcd(j, q) != 1 {
                    return Err(Error::NotCoprime { value: r, modulus: q });
                }
                out.push(j);
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    };
    if set.is_empty() {
        return Err(Error::EmptyEnsemble(format!("{} for q={q}", spec.kind)));
    }
    Ok(set)
}

/// Partial Fisher–Yates over the coprime residues driven by `ChaCha20Rng::seed_from_u64(seed)`.
fn sparse_sample(q: u64, h: f64, seed: u64) -> Result<Vec<u64>> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!("h={h} outside (0,1]")));
    }
    let mut pool = coprime_residues(q);
    let want = ((q as f64).powf(h).ceil() as usize).clamp(1, pool.len());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in 0..want {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(want);
    pool.sort_unstable();
    Ok(pool)
}

/// Overlapping occurrences of `w` in `digits`.
#[inline]
pub fn count_occurrences(digits: &[u64], w: &[u64]) -> usize {
    if w.len() == 1 {
        let a = w[0];
        return digits.iter().filter(|&&d| d == a).count();
    }
    if digits.len() < w.len() {
        return 0;
    }
    digits.windows(w.len()).filter(|s| *s == w).count()
}

/// `D_w(f)`: overlapping occurrences of `w` divided by the `n − k + 1` window positions.
pub fn window_density(f: ReducedFraction, w: &Window) -> Result<f64> {
    digit_string_density(f.expand().as_slice(), w)
}

/// `D_w` on an arbitrary digit string (canonical or not).
pub fn digit_string_density(digits: &[u64], w: &Window) -> Result<f64> {
    let (n, k) = (digits.len(), w.len());
    if k > n {
        return Err(Error::WindowTooLong { window: k, len: n });
    }
    Ok(count_occurrences(digits, w.as_slice()) as f64 / (n - k + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevEntry {
    pub eps: f64,
    pub prob: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    #[serde(rename = "w")]
    pub window: Window,
    pub target: f64,
    /// Mean of `D_w(j/q)` over the numerators whose expansion is at least as long as `w`.
    pub mean: Option<f64>,
    pub too_short: u64,
    pub dev: Vec<DevEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStat {
    pub target: f64,
    pub mean_ratio: f64,
    pub mean_len: f64,
    pub dev: Vec<DevEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub q: u64,
    pub ensemble: String,
    pub ensemble_size: u64,
    /// Numerators whose expansion is shorter than the longest window.
    pub too_short: u64,
    pub windows: Vec<WindowStat>,
    pub length: LengthStat,
    /// Left `None` by [`deviation_report`] so that reports are reproducible byte for byte.
    pub runtime_ms: Option<u64>,
}

impl DeviationReport {
    pub fn window(&self, w: &Window) -> Option<&WindowStat> {
        self.windows.iter().find(|s| &s.window == w)
    }

    pub fn kind_label(&self) -> &str {
        self.ensemble.split(':').next().unwrap_or("")
    }

    pub const CSV_HEADER: &'static str = "q,ensemble,ensemble_size,statistic,target,mean,eps,count,prob";

    /// One row per (window, ε) followed by one row per ε for the length statistic
    /// (`statistic = len`). Window digits are `-`-joined to stay inside one CSV cell.
    pub fn write_csv_rows<W: Write>(&self, mut out: W) -> io::Result<()> {
        let ens = csv_cell(&self.ensemble);
        for ws in &self.windows {
            let label = ws
                .window
                .as_slice()
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join("-");
            let mean = ws.mean.map(|m| m.to_string()).unwrap_or_default();
            for d in &ws.dev {
                writeln!(
                    out,
                    "{},{},{},w={},{},{},{},{},{}",
                    self.q, ens, self.ensemble_size, label, ws.target, mean, d.eps, d.count, d.prob
                )?;
            }
        }
        for d in &self.length.dev {
            writeln!(
                out,
                "{},{},{},len,{},{},{},{},{}",
                self.q,
                ens,
                self.ensemble_size,
                self.length.target,
                self.length.mean_ratio,
                d.eps,
                d.count,
                d.prob
            )?;
        }
        Ok(())
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Longest possible canonical expansion for `q < 2^63` (Fibonacci bound).
const MAX_LEN: usize = 96;

#[derive(Debug, Clone)]
struct Tally {
    // per window
    too_short: Vec<u64>,
    occ_by_len: Vec<[u64; MAX_LEN]>,
    dev: Vec<Vec<u64>>,
    // length
    len_sum: u64,
    len_dev: Vec<u64>,
}

impl Tally {
    fn new(n_windows: usize, n_eps: usize) -> Self {
        Self {
            too_short: vec![0; n_windows],
            occ_by_len: vec![[0; MAX_LEN]; n_windows],
            dev: vec![vec![0; n_eps]; n_windows],
            len_sum: 0,
            len_dev: vec![0; n_eps],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.too_short.iter_mut().zip(&other.too_short) {
            *a += b;
        }
        for (a, b) in self.occ_by_len.iter_mut().zip(&other.occ_by_len) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.dev.iter_mut().zip(&other.dev) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.len_sum += other.len_sum;
        for (a, b) in self.len_dev.iter_mut().zip(&other.len_dev) {
            *a += b;
        }
        self
    }
}

/// Empirical deviation statistics over `Λ_q` for each window and for the normalized
/// length, at every ε of `eps_list`.
///
/// A numerator whose expansion is shorter than a window counts as deviating for that
/// window at every ε and is tallied in `too_short`; it is excluded from the mean.
pub fn deviation_report(
    spec: &EnsembleSpec,
    windows: &[Window],
    eps_list: &[f64],
) -> Result<DeviationReport> {
    let residues = realize_ensemble(spec)?;
    deviation_report_for(spec.q, &spec.kind.to_string(), &residues, windows, eps_list)
}

/// As [`deviation_report`], over an already realized numerator list.
pub fn deviation_report_for(
    q: u64,
    ensemble: &str,
    residues: &[u64],
    windows: &[Window],
    eps_list: &[f64],
) -> Result<DeviationReport> {
    check_modulus(q)?;
    if residues.is_empty() {
        return Err(Error::EmptyEnsemble(format!("{ensemble} for q={q}")));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::InvalidParameter("eps must be finite and >= 0".into()));
    }
    let targets = windows
        .iter()
        .map(target_density)
        .collect::<Result<Vec<_>>>()?;
    let levy = levy_constant();
    let log_q = (q as f64).ln();

    let tally = residues
        .par_chunks(2048)
        .map(|chunk| {
            let mut t = Tally::new(windows.len(), eps_list.len());
            let mut digits = Vec::with_capacity(MAX_LEN);
            for &j in chunk {
                expand_into(j, q, &mut digits);
                let n = digits.len();
                t.len_sum += n as u64;
                let ratio_dev = (n as f64 / log_q - levy).abs();
                for (c, &eps) in t.len_dev.iter_mut().zip(eps_list) {
                    if ratio_dev > eps {
                        *c += 1;
                    }
                }
                for (wi, w) in windows.iter().enumerate() {
                    let k = w.len();
                    if n < k {
                        t.too_short[wi] += 1;
                        for c in t.dev[wi].iter_mut() {
                            *c += 1;
                        }
                        continue;
                    }
                    let occ = count_occurrences(&digits, w.as_slice());
                    t.occ_by_len[wi][n] += occ as u64;
                    let d = occ as f64 / (n - k + 1) as f64;
                    let dev = (d - targets[wi]).abs();
                    for (c, &eps) in t.dev[wi].iter_mut().zip(eps_list) {
                        if dev > eps {
                            *c += 1;
                        }
                    }
                }
            }
            t
        })
        .reduce(
            || Tally::new(windows.len(), eps_list.len()),
            Tally::merge,
        );

    let size = residues.len() as u64;
    let entries = |counts: &[u64]| -> Vec<DevEntry> {
        eps_list
            .iter()
            .zip(counts)
            .map(|(&eps, &count)| DevEntry {
                eps,
                prob: count as f64 / size as f64,
                count,
            })
            .collect()
    };

    let window_stats = windows
        .iter()
        .enumerate()
        .map(|(wi, w)| {
            let counted = size - tally.too_short[wi];
            let k = w.len();
            let mean = (counted > 0).then(|| {
                let s: f64 = tally.occ_by_len[wi]
                    .iter()
                    .enumerate()
                    .filter(|&(_, &occ)| occ > 0)
                    .map(|(n, &occ)| occ as f64 / (n - k + 1) as f64)
                    .sum();
                s / counted as f64
            });
            WindowStat {
                window: w.clone(),
                target: targets[wi],
                mean,
                too_short: tally.too_short[wi],
                dev: entries(&tally.dev[wi]),
            }
        })
        .collect();

    let max_k = windows.iter().map(Window::len).max().unwrap_or(0);
    let too_short = if max_k == 0 {
        0
    } else {
        windows
            .iter()
            .position(|w| w.len() == max_k)
            .map(|i| tally.too_short[i])
            .unwrap_or(0)
    };
    let mean_len = tally.len_sum as f64 / size as f64;

    Ok(DeviationReport {
        q,
        ensemble: ensemble.to_string(),
        ensemble_size: size,
        too_short,
        windows: window_stats,
        length: LengthStat {
            target: levy,
            mean_ratio: mean_len / log_q,
            mean_len,
            dev: entries(&tally.len_dev),
        },
        runtime_ms: None,
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two points for a slope".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Exponent of `ℙ_q ≈ q^{−α}` from `(q, count, ensemble_size)` triples; a zero count is
/// replaced by probability `1/(size+1)`.
pub fn fit_exponent(points: &[(u64, u64, u64)]) -> Result<f64> {
    let mut qs: Vec<u64> = points.iter().map(|p| p.0).collect();
    qs.sort_unstable();
    qs.dedup();
    if qs.len() < 2 {
        return Err(Error::InsufficientData(
            "need reports at two or more distinct q".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|&(q, _, _)| (q as f64).ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|&(_, count, size)| {
            let p = if count == 0 {
                1.0 / (size + 1) as f64
            } else {
                count as f64 / size as f64
            };
            -p.ln()
        })
        .collect();
    least_squares_slope(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub eps: f64,
    pub windows: Vec<(Window, f64)>,
    pub length: f64,
}

impl RateFit {
    pub fn window(&self, w: &Window) -> Option<f64> {
        self.windows.iter().find(|(x, _)| x == w).map(|(_, a)| *a)
    }
}

fn find_eps(dev: &[DevEntry], eps: f64) -> Option<&DevEntry> {
    dev.iter().find(|d| (d.eps - eps).abs() <= 1e-12 * eps.abs().max(1.0))
}

/// Empirical exponents `α` (slope of `−log ℙ_q` against `log q`) for every window of
/// the first report and for the length statistic.
pub fn rate_fit(reports: &[DeviationReport], eps: f64) -> Result<RateFit> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InsufficientData("no reports".into()))?;
    if reports.iter().any(|r| r.kind_label() != first.kind_label()) {
        return Err(Error::InsufficientData(
            "reports mix ensemble kinds".into(),
        ));
    }
    let missing = || Error::InsufficientData(format!("eps={eps} missing from a report"));
    let mut windows = Vec::with_capacity(first.windows.len());
    for ws in &first.windows {
        let points = reports
            .iter()
            .map(|r| {
                let stat = r
                    .window(&ws.window)
                    .ok_or_else(|| Error::InsufficientData(format!("window {} missing", ws.window)))?;
                let d = find_eps(&stat.dev, eps).ok_or_else(missing)?;
                Ok((r.q, d.count, r.ensemble_size))
            })
            .collect::<Result<Vec<_>>>()?;
        windows.push((ws.window.clone(), fit_exponent(&points)?));
    }
    let points = reports
        .iter()
        .map(|r| {
            let d = find_eps(&r.length.dev, eps).ok_or_else(missing)?;
            Ok((r.q, d.count, r.ensemble_size))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateFit {
        eps,
        windows,
        length: fit_exponent(&points)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[u64]) -> Window {
        Window::new(v.to_vec()).unwrap()
    }

    fn frac(p: u64, q: u64) -> ReducedFraction {
        ReducedFraction::new(p, q).unwrap()
    }

    #[test]
    fn realize_examples() {
        let all = realize_ensemble(&EnsembleSpec::new(EnsembleKind::All, 7)).unwrap();
        assert_eq!(all, vec![1, 2, 3, 4, 5, 6]);
        let p6 = realize_ensemble(&EnsembleSpec::new(EnsembleKind::Primes, 6)).unwrap();
        assert_eq!(p6, vec![5]);
        let p7 = realize_ensemble(&EnsembleSpec::new(EnsembleKind::Primes, 7)).unwrap();
        assert_eq!(p7, vec![2, 3, 5]);
    }

    #[test]
    fn realize_errors() {
        assert!(matches!(
            realize_ensemble(&EnsembleSpec::new(EnsembleKind::Primes, 2)),
            Err(Error::EmptyEnsemble(_))
        ));
        assert!(matches!(
            realize_ensemble(&EnsembleSpec::new(
                EnsembleKind::Explicit { residues: vec![1, 4] },
                6
            )),
            Err(Error::NotCoprime { .. })
        ));
        assert!(realize_ensemble(&EnsembleSpec::new(EnsembleKind::All, 1)).is_err());
        assert!(matches!(
            realize_ensemble(&EnsembleSpec::new(EnsembleKind::All, (1 << 31) + 1)),
            Err(Error::Overflow(_))
        ));
        assert!(matches!(
            realize_ensemble(&EnsembleSpec::new(EnsembleKind::Explicit { residues: vec![] }, 7)),
            Err(Error::EmptyEnsemble(_))
        ));
    }

    #[test]
    fn explicit_residues_normalized() {
        let s = EnsembleSpec::new(EnsembleKind::Explicit { residues: vec![10, 3, 2] }, 7);
        assert_eq!(realize_ensemble(&s).unwrap(), vec![2, 3]);
    }

    #[test]
    fn sparse_sampling() {
        let q = 10_007;
        let spec = EnsembleSpec::new(EnsembleKind::RandomSparse { h: 0.75, seed: 3 }, q);
        let a = realize_ensemble(&spec).unwrap();
        let b = realize_ensemble(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), (q as f64).powf(0.75).ceil() as usize);
        assert!(a.windows(2).all(|p| p[0] < p[1]));
        assert!(a.iter().all(|&j| gcd(j, q) == 1));
        let other = realize_ensemble(&EnsembleSpec::new(
            EnsembleKind::RandomSparse { h: 0.75, seed: 4 },
            q,
        ))
        .unwrap();
        assert_ne!(a, other);
        // h = 1 clamps to φ(q)
        let full = realize_ensemble(&EnsembleSpec::new(
            EnsembleKind::RandomSparse { h: 1.0, seed: 0 },
            12,
        ))
        .unwrap();
        assert_eq!(full, vec![1, 5, 7, 11]);
    }

    #[test]
    fn ensemble_kind_parsing() {
        assert_eq!("all".parse::<EnsembleKind>().unwrap(), EnsembleKind::All);
        assert_eq!("primes".parse::<EnsembleKind>().unwrap(), EnsembleKind::Primes);
        let r: EnsembleKind = "random:h=0.9,seed=7".parse().unwrap();
        assert_eq!(r, EnsembleKind::RandomSparse { h: 0.9, seed: 7 });
        assert_eq!(r.to_string(), "random:h=0.9,seed=7");
        assert!("random:h=1.5,seed=7".parse::<EnsembleKind>().is_err());
        assert!("random:h=0.5".parse::<EnsembleKind>().is_err());
        assert!("bogus".parse::<EnsembleKind>().is_err());
        let e: EnsembleKind = "explicit:1,2".parse().unwrap();
        assert_eq!(e.to_string(), "explicit:1,2");
    }

    #[test]
    fn window_density_examples() {
        assert_eq!(digit_string_density(&[1, 2, 1, 2, 1], &w(&[1, 2])).unwrap(), 0.5);
        assert_eq!(count_occurrences(&[1, 2, 1, 2, 1], &[1, 2]), 2);
        assert_eq!(count_occurrences(&[1, 1, 1], &[1, 1]), 2);
        assert_eq!(window_density(frac(3, 7), &w(&[2, 3])).unwrap(), 1.0);
        assert_eq!(window_density(frac(3, 7), &w(&[1])).unwrap(), 0.0);
        assert_eq!(window_density(frac(4, 7), &w(&[1])).unwrap(), 2.0 / 3.0);
        assert!(matches!(
            window_density(frac(1, 2), &w(&[2, 2])),
            Err(Error::WindowTooLong { window: 2, len: 1 })
        ));
    }

    #[test]
    fn window_density_sliding_count() {
        // the fraction whose (non-canonical) expansion is [1,2,1,2,1] is [1,2,1,3]
        let f = crate::cfe::evaluate(&[1, 2, 1, 2, 1]).unwrap();
        assert_eq!(f.expand().as_slice(), &[1, 2, 1, 3]);
        assert_eq!(window_density(f, &w(&[1, 2])).unwrap(), 1.0 / 3.0);
        let g = crate::cfe::evaluate(&[1, 2, 1, 2, 2]).unwrap();
        assert_eq!(window_density(g, &w(&[1, 2])).unwrap(), 0.5);
    }

    #[test]
    fn report_q7() {
        let spec = EnsembleSpec::new(EnsembleKind::All, 7);
        let r = deviation_report(&spec, &[w(&[1])], &[0.5, 0.0, 0.1]).unwrap();
        assert_eq!(r.ensemble_size, 6);
        let ws = &r.windows[0];
        // expansions [7],[3,2],[2,3],[1,1,3],[1,2,2],[1,6]: D_(1) = 0,0,0,2/3,1/3,1/2
        assert!((ws.mean.unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(ws.dev[0].count, 0);
        assert_eq!(ws.dev[1].count, 6);
        // > 0.1: the three zeros and 2/3; 1/3 and 1/2 sit within 0.1 of 0.415
        assert_eq!(ws.dev[2].count, 4);
        let mean_len = (1 + 2 + 2 + 3 + 3 + 2) as f64 / 6.0;
        assert!((r.length.mean_len - mean_len).abs() < 1e-15);
        assert!((r.length.mean_ratio - mean_len / 7f64.ln()).abs() < 1e-15);
        assert_eq!(r.ensemble, "all");
        assert_eq!(r.too_short, 0);
    }

    #[test]
    fn report_too_short_counts_as_deviating() {
        let spec = EnsembleSpec::new(EnsembleKind::All, 7);
        let r = deviation_report(&spec, &[w(&[1, 2, 2])], &[0.0, 1.0]).unwrap();
        let ws = &r.windows[0];
        // lengths 1,2,2,3,3,2 → four too short
        assert_eq!(ws.too_short, 4);
        assert_eq!(r.too_short, 4);
        assert_eq!(ws.dev[1].count, 4);
        // 5/7 = [1,2,2] matches once out of 1 position, 4/7 = [1,1,3] zero
        assert!((ws.mean.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singleton_ensemble_has_binary_probabilities() {
        let spec = EnsembleSpec::new(EnsembleKind::Explicit { residues: vec![3] }, 7);
        let r = deviation_report(&spec, &[w(&[1]), w(&[2])], &[0.0, 0.2, 0.5, 0.9]).unwrap();
        for ws in &r.windows {
            for d in &ws.dev {
                assert!(d.prob == 0.0 || d.prob == 1.0);
            }
        }
    }

    #[test]
    fn report_json_schema() {
        let spec = EnsembleSpec::new(EnsembleKind::All, 7);
        let r = deviation_report(&spec, &[w(&[1])], &[0.5]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in [
            "q",
            "ensemble",
            "ensemble_size",
            "too_short",
            "windows",
            "length",
            "runtime_ms",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let win = &v["windows"][0];
        assert_eq!(win["w"], serde_json::json!([1]));
        for key in ["target", "mean", "dev"] {
            assert!(win.get(key).is_some(), "{key}");
        }
        for key in ["eps", "prob", "count"] {
            assert!(win["dev"][0].get(key).is_some(), "{key}");
        }
        for key in ["target", "mean_ratio", "dev"] {
            assert!(v["length"].get(key).is_some(), "{key}");
        }
        let back: DeviationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_rows() {
        let spec = EnsembleSpec::new(EnsembleKind::All, 7);
        let r = deviation_report(&spec, &[w(&[1]), w(&[1, 2])], &[0.1, 0.5]).unwrap();
        let mut buf = Vec::new();
        r.write_csv_rows(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2 * 2 + 2);
        assert!(lines[0].starts_with("7,all,6,w=1,"));
        assert!(lines[2].starts_with("7,all,6,w=1-2,"));
        assert!(lines[4].starts_with("7,all,6,len,"));
        let cols = DeviationReport::CSV_HEADER.split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == cols));
    }

    #[test]
    fn slope_fits() {
        // constant probability
        let pts = [(100, 50, 100), (1000, 500, 1000), (10_000, 5000, 10_000)];
        assert!(fit_exponent(&pts).unwrap().abs() < 1e-12);
        // ℙ_q = 1/q
        let pts = [(100, 1, 100), (10_000, 1, 10_000)];
        assert!((fit_exponent(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert!(fit_exponent(&[(100, 1, 100)]).is_err());
        assert!(fit_exponent(&[(100, 1, 100), (100, 2, 100)]).is_err());
        // zero count smoothing: ℙ = 1/(size+1)
        let pts = [(10, 0, 9), (100, 0, 99)];
        assert!((fit_exponent(&pts).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_errors() {
        let a = deviation_report(&EnsembleSpec::new(EnsembleKind::All, 101), &[w(&[1])], &[0.1])
            .unwrap();
        assert!(rate_fit(std::slice::from_ref(&a), 0.1).is_err());
        let b = deviation_report(&EnsembleSpec::new(EnsembleKind::Primes, 1009), &[w(&[1])], &[0.1])
            .unwrap();
        assert!(rate_fit(&[a.clone(), b], 0.1).is_err());
        let c = deviation_report(&EnsembleSpec::new(EnsembleKind::All, 1009), &[w(&[1])], &[0.1])
            .unwrap();
        assert!(rate_fit(&[a.clone(), c.clone()], 0.2).is_err());
        assert!(rate_fit(&[a, c], 0.1).is_ok());
        assert!(rate_fit(&[], 0.1).is_err());
    }

    #[test]
    fn totient_values() {
        for q in 2..500u64 {
            assert_eq!(totient(q), coprime_residues(q).len() as u64, "{q}");
        }
    }
}
