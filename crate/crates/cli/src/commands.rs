use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cf_statlab::cfe::{format_digits, gcd, neg_mod_inverse, ReducedFraction};
use cf_statlab::gauss::Window;
use cf_statlab::orbit::{
    alpha1_profile, dual_orbit_identity, ensemble_mass, excursion_fraction, siegel_retained_mass,
    ExcursionSummary, HaarOracle, MassRow, OrbitSpec,
};
use cf_statlab::stats::{
    deviation_report, rate_fit, window_density, DeviationReport, EnsembleKind, EnsembleSpec,
    RateFit,
};
use cf_statlab::zaremba::{conjecture_scan, scan_range, ZarembaRow};
use cf_statlab::Error;

use crate::config::{slug, ExperimentConfig};
use crate::output::{cached, emit, Artifacts, Cache};
use crate::svg::zaremba_scatter;

pub struct Ctx {
    pub out_dir: PathBuf,
    pub cache: Option<Cache>,
}

impl Ctx {
    fn run(
        &self,
        cfg: &ExperimentConfig,
        overrides: BTreeMap<String, PathBuf>,
        compute: impl FnOnce() -> Result<Artifacts>,
    ) -> Result<()> {
        let art = cached(self.cache.as_ref(), cfg, compute)?;
        emit(&art, &self.out_dir, &overrides)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a fraction and report window densities.
    Cfe(CfeArgs),
    /// Deviation report for one modulus and ensemble.
    Stats(StatsArgs),
    /// Empirical rate exponents over several moduli.
    Rates(RatesArgs),
    /// Bounded-digit numerator counts and the conjecture scan.
    Zaremba(ZarembaArgs),
    /// The α₁ profile and cusp excursions of one orbit.
    Orbit(OrbitArgs),
    /// Dual-orbit identity residuals.
    OrbitDual(OrbitDualArgs),
    /// Ensemble-averaged retained mass.
    OrbitMass(OrbitMassArgs),
    /// Counts of 5-Zaremba numerators (all and prime) with a two-panel plot.
    Figure1(Figure1Args),
}

impl Command {
    pub fn run(self, ctx: &Ctx) -> Result<()> {
        match self {
            Self::Cfe(a) => cfe(a),
            Self::Stats(a) => stats(a, ctx),
            Self::Rates(a) => rates(a, ctx),
            Self::Zaremba(a) => zaremba(a, ctx),
            Self::Orbit(a) => orbit(a, ctx),
            Self::OrbitDual(a) => orbit_dual(a, ctx),
            Self::OrbitMass(a) => orbit_mass(a, ctx),
            Self::Figure1(a) => figure1(a, ctx),
        }
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter(msg.into()).into()
}

fn parse_windows(raw: &[String]) -> Result<Vec<Window>> {
    raw.iter()
        .map(|w| w.parse::<Window>().with_context(|| format!("window {w:?}")))
        .collect()
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(invalid("eps must be a nonempty list of finite values >= 0"));
    }
    Ok(())
}

fn check_grid(grid: f64) -> Result<()> {
    if !(grid.is_finite() && grid > 0.0) {
        return Err(invalid(format!("grid {grid} must be > 0")));
    }
    Ok(())
}

fn check_thresholds(m: &[f64]) -> Result<()> {
    if m.is_empty() || m.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(invalid("M must be a nonempty list of values > 0"));
    }
    Ok(())
}

struct Ensemble {
    kind: EnsembleKind,
    echo: String,
    sha256: Option<String>,
    slug: String,
    seed: Option<u64>,
}

/// `all`, `primes`, `random:h=H,seed=S`, `explicit:r1,r2,…` or `file:PATH` (residues
/// separated by commas or whitespace, `#` starts a comment).
fn parse_ensemble(s: &str) -> Result<Ensemble> {
    if let Some(path) = s.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading ensemble {path}"))?;
        let residues = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|_| invalid(format!("bad residue {t:?} in {path}"))))
            .collect::<Result<Vec<_>>>()?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        return Ok(Ensemble {
            kind: EnsembleKind::Explicit { residues },
            echo: s.to_string(),
            slug: format!("file-{}", &digest[..12]),
            sha256: Some(digest),
            seed: None,
        });
    }
    let kind: EnsembleKind = s.parse()?;
    let seed = match kind {
        EnsembleKind::RandomSparse { seed, .. } => Some(seed),
        _ => None,
    };
    let slug = match &kind {
        EnsembleKind::Explicit { residues } => {
            let joined = format_digits(residues);
            format!("explicit-{}", &hex::encode(Sha256::digest(joined.as_bytes()))[..12])
        }
        other => slug(&other.to_string()),
    };
    Ok(Ensemble {
        echo: kind.to_string(),
        kind,
        sha256: None,
        slug,
        seed,
    })
}

fn with_ensemble(cfg: &mut ExperimentConfig, e: &Ensemble) {
    cfg.ensemble = Some(e.echo.clone());
    cfg.ensemble_sha256 = e.sha256.clone();
    cfg.seed = e.seed;
}

/// Reduces `p` modulo `q`; the residue must be nonzero and coprime to `q`.
fn normalize_numerator(p: u64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(invalid(format!("modulus {q} < 2")));
    }
    let r = p % q;
    if r == 0 || gcd(r, q) != 1 {
        return Err(Error::NotCoprime { value: p, modulus: q }.into());
    }
    Ok(r)
}

fn csv_doc(cfg: &ExperimentConfig, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = cfg.csv_header().into_bytes();
    body(&mut buf)?;
    Ok(buf)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CfeArgs {
    /// Fraction `p/q` with 0 < p < q, in lowest terms.
    pub fraction: String,
    /// Digit window such as `1` or `1,2`; repeatable.
    #[arg(long = "window")]
    pub windows: Vec<String>,
}

fn cfe(a: CfeArgs) -> Result<()> {
    let f: ReducedFraction = a.fraction.parse()?;
    let windows = parse_windows(&a.windows)?;
    let digits = f.expand();
    println!("digits={} len={}", digits, digits.len());
    for w in &windows {
        match window_density(f, w) {
            Ok(d) => println!("window={w} density={d}"),
            Err(Error::WindowTooLong { .. }) => println!("window={w} density=undefined (expansion too short)"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub q: u64,
    /// `all`, `primes`, `random:h=H,seed=S`, `explicit:…` or `file:PATH`.
    #[arg(long, default_value = "all")]
    pub ensemble: String,
    /// Digit window; repeatable.
    #[arg(long = "window", default_values_t = vec!["1".to_string()])]
    pub windows: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1])]
    pub eps: Vec<f64>,
    /// Record `runtime_ms` in the JSON report (disables the cache).
    #[arg(long)]
    pub timing: bool,
}

fn stats(a: StatsArgs, ctx: &Ctx) -> Result<()> {
    let windows = parse_windows(&a.windows)?;
    check_eps(&a.eps)?;
    let ens = parse_ensemble(&a.ensemble)?;
    let mut cfg = ExperimentConfig::new("stats");
    cfg.q = Some(a.q);
    with_ensemble(&mut cfg, &ens);
    cfg.windows = Some(windows.iter().map(Window::to_string).collect());
    cfg.eps = Some(a.eps.clone());
    cfg.timing = a.timing.then_some(true);
    let stem = format!("stats_q{}_{}", a.q, ens.slug);

    let compute = || -> Result<Artifacts> {
        let start = Instant::now();
        let mut report = deviation_report(&EnsembleSpec::new(ens.kind.clone(), a.q), &windows, &a.eps)?;
        if a.timing {
            report.runtime_ms = Some(start.elapsed().as_millis() as u64);
        }
        let mut art = Artifacts::default();
        art.file(format!("{stem}.json"), cfg.json_document(&report));
        art.file(
            format!("{stem}.csv"),
            csv_doc(&cfg, |b| {
                use std::io::Write;
                writeln!(b, "{}", DeviationReport::CSV_HEADER)?;
                report.write_csv_rows(b)
            })?,
        );
        art.stdout = summarize_report(&report);
        Ok(art)
    };
    if a.timing {
        emit(&compute()?, &ctx.out_dir, &BTreeMap::new())
    } else {
        ctx.run(&cfg, BTreeMap::new(), compute)
    }
}

fn summarize_report(r: &DeviationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "q={} ensemble={} size={} too_short={}",
        r.q, r.ensemble, r.ensemble_size, r.too_short
    );
    for w in &r.windows {
        let mean = w.mean.map_or_else(|| "undefined".into(), |m| m.to_string());
        let _ = write!(s, "w={} target={} mean={mean}", w.window, w.target);
        for d in &w.dev {
            let _ = write!(s, " P(eps={})={}", d.eps, d.prob);
        }
        s.push('\n');
    }
    let _ = write!(
        s,
        "len target={} mean_ratio={} mean_len={}",
        r.length.target, r.length.mean_ratio, r.length.mean_len
    );
    for d in &r.length.dev {
        let _ = write!(s, " P(eps={})={}", d.eps, d.prob);
    }
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Moduli, comma-separated; at least two distinct values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<u64>,
    #[arg(long, default_value = "all")]
    pub ensemble: String,
    #[arg(long = "window", default_values_t = vec!["1".to_string()])]
    pub windows: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1])]
    pub eps: Vec<f64>,
}

#[derive(Serialize)]
struct RatesDoc<'a> {
    fits: &'a [RateFit],
    reports: &'a [DeviationReport],
}

fn rates(a: RatesArgs, ctx: &Ctx) -> Result<()> {
    let windows = parse_windows(&a.windows)?;
    check_eps(&a.eps)?;
    let ens = parse_ensemble(&a.ensemble)?;
    let mut cfg = ExperimentConfig::new("rates");
    cfg.q_list = Some(a.q.clone());
    with_ensemble(&mut cfg, &ens);
    cfg.windows = Some(windows.iter().map(Window::to_string).collect());
    cfg.eps = Some(a.eps.clone());
    let stem = format!("rates_{}", ens.slug);

    ctx.run(&cfg, BTreeMap::new(), || {
        let reports = a
            .q
            .iter()
            .map(|&q| deviation_report(&EnsembleSpec::new(ens.kind.clone(), q), &windows, &a.eps))
            .collect::<cf_statlab::Result<Vec<_>>>()?;
        let fits = a
            .eps
            .iter()
            .map(|&e| rate_fit(&reports, e))
            .collect::<cf_statlab::Result<Vec<_>>>()?;
        let mut table = String::from("statistic,eps,alpha\n");
        for f in &fits {
            for (w, alpha) in &f.windows {
                let _ = writeln!(table, "w={},{},{alpha}", w.as_slice().iter().map(u64::to_string).collect::<Vec<_>>().join("-"), f.eps);
            }
            let _ = writeln!(table, "len,{},{}", f.eps, f.length);
        }
        let mut art = Artifacts::default();
        art.file(format!("{stem}.json"), cfg.json_document(&RatesDoc { fits: &fits, reports: &reports }));
        art.file(format!("{stem}.csv"), format!("{}{table}", cfg.csv_header()));
        for r in &reports {
            art.stdout.push_str(&summarize_report(r));
        }
        art.stdout.push_str(&table);
        Ok(art)
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ZarembaArgs {
    #[arg(long, default_value_t = 2)]
    pub qmin: u64,
    #[arg(long)]
    pub qmax: u64,
    /// Digit bound.
    #[arg(long)]
    pub k: u64,
    /// Scan for prime numerators only.
    #[arg(long)]
    pub primes_only: bool,
    /// Also write the two-panel scatter plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn zaremba_rows_csv(cfg: &ExperimentConfig, rows: &[ZarembaRow]) -> Result<Vec<u8>> {
    csv_doc(cfg, |b| {
        use std::io::Write;
        writeln!(b, "{}", ZarembaRow::CSV_HEADER)?;
        for r in rows {
            r.write_csv(&mut *b)?;
        }
        Ok(())
    })
}

fn prefixed(list: &str) -> String {
    if list.is_empty() {
        String::new()
    } else {
        format!(" {list}")
    }
}

fn zaremba(a: ZarembaArgs, ctx: &Ctx) -> Result<()> {
    if a.qmin > a.qmax {
        return Err(invalid(format!("qmin {} > qmax {}", a.qmin, a.qmax)));
    }
    let mut cfg = ExperimentConfig::new("zaremba");
    cfg.q_min = Some(a.qmin);
    cfg.q_max = Some(a.qmax);
    cfg.k = Some(a.k);
    cfg.primes_only = Some(a.primes_only);
    cfg.svg = a.svg.is_some().then_some(true);
    let stem = format!(
        "zaremba_k{}_q{}-{}{}",
        a.k,
        a.qmin,
        a.qmax,
        if a.primes_only { "_primes" } else { "" }
    );
    let svg_name = format!("{stem}.svg");
    let mut overrides = BTreeMap::new();
    if let Some(p) = &a.svg {
        overrides.insert(svg_name.clone(), p.clone());
    }

    ctx.run(&cfg, overrides, || {
        let rows = scan_range(a.qmin, a.qmax, a.k)?;
        let scan = conjecture_scan(a.qmax, a.k, a.primes_only)?;
        let in_range = |v: &[u64]| -> Vec<u64> { v.iter().copied().filter(|&q| q >= a.qmin).collect() };
        let counter = format_digits(&in_range(&scan.counterexamples));
        let vacuous = format_digits(&in_range(&scan.vacuous));

        let mut csv = zaremba_rows_csv(&cfg, &rows)?;
        csv.extend_from_slice(format!("# counterexamples:{}\n", prefixed(&counter)).as_bytes());
        if a.primes_only {
            csv.extend_from_slice(format!("# no prime numerator:{}\n", prefixed(&vacuous)).as_bytes());
        }
        let mut art = Artifacts::default();
        art.file(format!("{stem}.csv"), csv);
        if a.svg.is_some() {
            art.file(svg_name, zaremba_scatter(&cfg.svg_header(), &rows, a.k));
        }
        art.say(format!("rows={}", rows.len()));
        art.say(format!("counterexamples={counter}"));
        if a.primes_only {
            art.say(format!("no_prime_numerator={vacuous}"));
        }
        Ok(art)
    })
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 100)]
    pub qmin: u64,
    #[arg(long, default_value_t = 3000)]
    pub qmax: u64,
    #[arg(long, default_value_t = 5)]
    pub k: u64,
}

fn figure1(a: Figure1Args, ctx: &Ctx) -> Result<()> {
    if a.qmin > a.qmax {
        return Err(invalid(format!("qmin {} > qmax {}", a.qmin, a.qmax)));
    }
    let mut cfg = ExperimentConfig::new("figure1");
    cfg.q_min = Some(a.qmin);
    cfg.q_max = Some(a.qmax);
    cfg.k = Some(a.k);
    let stem = format!("figure1_k{}_q{}-{}", a.k, a.qmin, a.qmax);

    ctx.run(&cfg, BTreeMap::new(), || {
        let rows = scan_range(a.qmin, a.qmax, a.k)?;
        let both: Vec<_> = rows
            .iter()
            .filter_map(|r| Some((r.ratio_all?, r.ratio_prime?)))
            .collect();
        let above = both.iter().filter(|(x, y)| x > y).count();
        let mut art = Artifacts::default();
        art.file(format!("{stem}.csv"), zaremba_rows_csv(&cfg, &rows)?);
        art.file(format!("{stem}.svg"), zaremba_scatter(&cfg.svg_header(), &rows, a.k));
        art.say(format!("rows={}", rows.len()));
        art.say(format!("ratio_all>ratio_prime={above}/{}", both.len()));
        Ok(art)
    })
}

// ---------------------------------------------------------------------------

fn parse_horizon(raw: &str, q: u64) -> Result<f64> {
    if raw == "auto" {
        return Ok(2.0 * (q as f64).ln());
    }
    let t: f64 = raw.parse().map_err(|_| invalid(format!("--T {raw:?} is neither auto nor a number")))?;
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("--T {t} must be > 0")));
    }
    Ok(t)
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long)]
    pub q: u64,
    /// Numerator; reduced modulo q.
    #[arg(long)]
    pub p: u64,
    /// Horizon, or `auto` for 2 log q.
    #[arg(long = "T", default_value = "auto")]
    pub horizon: String,
    /// Cusp thresholds, comma-separated.
    #[arg(long = "M", value_delimiter = ',', default_values_t = vec![5.0])]
    pub thresholds: Vec<f64>,
    /// Validation grid step.
    #[arg(long, default_value_t = 1e-3)]
    pub grid: f64,
    /// Sampling step of the profile CSV (defaults to the grid).
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Serialize)]
struct OrbitDoc<'a> {
    p: u64,
    q: u64,
    #[serde(rename = "T")]
    horizon: f64,
    breakpoints: &'a [f64],
    excursions: &'a [ExcursionSummary],
}

fn orbit(a: OrbitArgs, ctx: &Ctx) -> Result<()> {
    check_thresholds(&a.thresholds)?;
    check_grid(a.grid)?;
    let step = a.step.unwrap_or(a.grid);
    check_grid(step)?;
    let p = normalize_numerator(a.p, a.q)?;
    let horizon = parse_horizon(&a.horizon, a.q)?;
    let spec = OrbitSpec::new(p, a.q, Some(horizon))?;
    let mut cfg = ExperimentConfig::new("orbit");
    cfg.q = Some(a.q);
    cfg.p = Some(p);
    cfg.horizon = Some(horizon);
    cfg.thresholds = Some(a.thresholds.clone());
    cfg.grid = Some(a.grid);
    cfg.step = a.step;
    let stem = format!("orbit_p{p}_q{}", a.q);

    ctx.run(&cfg, BTreeMap::new(), || {
        let profile = alpha1_profile(&spec)?;
        let summaries = a
            .thresholds
            .iter()
            .map(|&m| excursion_fraction(&spec, m, a.grid))
            .collect::<cf_statlab::Result<Vec<_>>>()?;
        let breakpoints = profile.breakpoints();
        let mut art = Artifacts::default();
        art.file(format!("{stem}.csv"), csv_doc(&cfg, |b| profile.write_csv(b, step))?);
        let mut table = String::from("M,T,fraction_above,sampled_fraction,grid,n_intervals\n");
        for s in &summaries {
            let _ = writeln!(
                table,
                "{},{},{},{},{},{}",
                s.threshold,
                s.horizon,
                s.fraction_above,
                s.sampled_fraction,
                s.grid,
                s.intervals.len()
            );
        }
        art.file(format!("{stem}_excursions.csv"), format!("{}{table}", cfg.csv_header()));
        art.file(
            format!("{stem}_excursions.json"),
            cfg.json_document(&OrbitDoc {
                p,
                q: a.q,
                horizon,
                breakpoints: &breakpoints,
                excursions: &summaries,
            }),
        );
        art.say(format!("p={p} q={} T={horizon} segments={}", a.q, profile.segments.len()));
        for s in &summaries {
            art.say(format!(
                "M={} fraction_above={} sampled_fraction={}",
                s.threshold, s.fraction_above, s.sampled_fraction
            ));
        }
        Ok(art)
    })
}

#[derive(Debug, Args)]
pub struct OrbitDualArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub p: u64,
    #[arg(long = "M", value_delimiter = ',', default_values_t = vec![2.0, 5.0, 10.0])]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub grid: f64,
}

fn orbit_dual(a: OrbitDualArgs, ctx: &Ctx) -> Result<()> {
    check_thresholds(&a.thresholds)?;
    check_grid(a.grid)?;
    let p = normalize_numerator(a.p, a.q)?;
    OrbitSpec::new(p, a.q, None)?;
    let mut cfg = ExperimentConfig::new("orbit-dual");
    cfg.q = Some(a.q);
    cfg.p = Some(p);
    cfg.thresholds = Some(a.thresholds.clone());
    cfg.grid = Some(a.grid);
    let stem = format!("orbit_dual_p{p}_q{}", a.q);

    ctx.run(&cfg, BTreeMap::new(), || {
        let dual = neg_mod_inverse(p, a.q)?;
        let rows = dual_orbit_identity(p, a.q, &a.thresholds, a.grid)?;
        let mut table = String::from("M,lhs,rhs,residual\n");
        for r in &rows {
            let _ = writeln!(table, "{},{},{},{}", r.threshold, r.lhs, r.rhs, r.residual);
        }
        let mut art = Artifacts::default();
        art.file(format!("{stem}.csv"), format!("{}{table}", cfg.csv_header()));
        art.say(format!("p={p} p_dual={dual} q={}", a.q));
        for r in &rows {
            art.say(format!(
                "M={} lhs={} rhs={} residual={}",
                r.threshold, r.lhs, r.rhs, r.residual
            ));
        }
        Ok(art)
    })
}

#[derive(Debug, Args)]
pub struct OrbitMassArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<u64>,
    #[arg(long, default_value = "all")]
    pub ensemble: String,
    #[arg(long = "M", value_delimiter = ',', default_values_t = vec![5.0])]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub grid: f64,
    /// Also estimate the Haar mass from this many random orbits (horizon 10⁴).
    #[arg(long)]
    pub haar_points: Option<usize>,
}

fn orbit_mass(a: OrbitMassArgs, ctx: &Ctx) -> Result<()> {
    check_thresholds(&a.thresholds)?;
    check_grid(a.grid)?;
    let ens = parse_ensemble(&a.ensemble)?;
    let mut cfg = ExperimentConfig::new("orbit-mass");
    cfg.q_list = Some(a.q.clone());
    with_ensemble(&mut cfg, &ens);
    cfg.thresholds = Some(a.thresholds.clone());
    cfg.grid = Some(a.grid);
    cfg.haar_points = a.haar_points;
    let stem = format!("orbit_mass_{}", ens.slug);

    ctx.run(&cfg, BTreeMap::new(), || {
        let mut rows = Vec::new();
        for &q in &a.q {
            for &m in &a.thresholds {
                rows.push(ensemble_mass(&EnsembleSpec::new(ens.kind.clone(), q), m, a.grid)?);
            }
        }
        let mut csv = csv_doc(&cfg, |b| {
            use std::io::Write;
            writeln!(b, "{}", MassRow::CSV_HEADER)?;
            for r in &rows {
                r.write_csv(&mut *b)?;
            }
            Ok(())
        })?;
        let mut art = Artifacts::default();
        for r in &rows {
            art.say(format!(
                "q={} M={} retained_mass={} n_orbits={}",
                r.q, r.threshold, r.retained_mass, r.n_orbits
            ));
        }
        if let Some(n) = a.haar_points {
            let oracle = HaarOracle {
                n_points: n,
                ..HaarOracle::default()
            };
            for &m in &a.thresholds {
                let mc = oracle.retained_mass(m)?;
                let siegel = siegel_retained_mass(m).map_or_else(|| "undefined".into(), |v| v.to_string());
                let line = format!("haar M={m} monte_carlo={mc} siegel={siegel}");
                csv.extend_from_slice(format!("# {line}\n").as_bytes());
                art.say(line);
            }
        }
        art.file(format!("{stem}.csv"), csv);
        Ok(art)
    })
}
