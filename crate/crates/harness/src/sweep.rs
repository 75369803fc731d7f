//! Parameter sweeps over the analytic and lattice engines.

use std::time::{Duration, Instant};

use mie_core::analytics::{die, mie_cumulants, MieDensity};
use mie_core::lattice::{
    enumerate_outcomes, ground_state_correlation, EnumeratedOutcome, OutcomePolicy, StatevectorOracle,
    TrajectorySampler, ORACLE_MAX_SITES,
};
use mie_core::{CftParams, RingGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Engine, ExperimentConfig, Point};
use crate::stats::{estimate_cumulants, Histogram};
use crate::HarnessError;

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "MIE_WORKERS";
pub const LINEAR_BINS: usize = 64;
pub const LOG_BINS: usize = 32;
pub const LOG_UPPER: f64 = 0.1;
/// Bins with fewer counts are left out of binwise comparisons.
pub const MIN_BIN_COUNT: u64 = 200;

#[derive(Debug)]
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    /// Worker count from the environment, or rayon's auto-detection.
    pub fn from_env() -> Result<Self, HarnessError> {
        let workers = match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| HarnessError::Validation(format!("{WORKERS_ENV} must be a count, got {v:?}")))?,
            Err(_) => 0,
        };
        Self::with_workers(workers)
    }

    /// `0` means auto-detect.
    pub fn with_workers(workers: usize) -> Result<Self, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| HarnessError::Validation(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Mie,
    Die,
    Distribution,
}

/// One CSV line: cumulants of the order-`n` entropy from one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub engine: String,
    pub n: f64,
    pub kappa: [Option<f64>; 3],
    pub err: [Option<f64>; 3],
}

impl Row {
    fn exact(engine: &str, n: f64, kappa: [f64; 3]) -> Self {
        Self {
            engine: engine.into(),
            n,
            kappa: kappa.map(finite),
            err: [Some(0.0); 3],
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSet {
    pub n: f64,
    pub linear: Histogram,
    pub log: Option<Histogram>,
}

/// `(lattice − analytic) / err` per cumulant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: f64,
    pub z: [Option<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub lattice: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub support: (f64, f64),
    pub guard: f64,
    /// `(S, P(S))` on a grid clustered towards both edges.
    pub curve: Vec<(f64, f64)>,
    pub linear_bins: Vec<BinComparison>,
    pub log_bins: Vec<BinComparison>,
    pub left_exponent: f64,
    pub right_exponent: f64,
    pub lognormal: Option<(f64, f64)>,
}

impl DistributionReport {
    /// Linear bins with at least [`MIN_BIN_COUNT`] samples that do not touch
    /// either guard band.
    pub fn bulk_bins(&self) -> impl Iterator<Item = &BinComparison> {
        let (lo, hi) = self.support;
        let g = self.guard;
        self.linear_bins
            .iter()
            .filter(move |b| b.count >= MIN_BIN_COUNT && b.lo > lo + g && b.hi < hi - g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub kind: ReportKind,
    pub zeta: f64,
    pub zeta_target: Option<f64>,
    pub g: f64,
    pub len: Option<usize>,
    pub bounds: Option<[usize; 4]>,
    pub seed: u64,
    pub trajectories: usize,
    pub rows: Vec<Row>,
    pub comparisons: Vec<Comparison>,
    pub histograms: Vec<HistogramSet>,
    pub distribution: Option<DistributionReport>,
    /// Outcome strings redrawn by the uniform policy.
    pub rejections: u64,
    pub failure: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl StatReport {
    fn new(kind: ReportKind, cfg: &ExperimentConfig, point: &Point) -> Self {
        Self {
            kind,
            zeta: point.zeta,
            zeta_target: point.target,
            g: cfg.g,
            len: point.geometry.map(|g| g.len()),
            bounds: point.geometry.map(|g| g.bounds()),
            seed: cfg.seed,
            trajectories: if cfg.exhaustive { 0 } else { cfg.trajectories },
            rows: Vec::new(),
            comparisons: Vec::new(),
            histograms: Vec::new(),
            distribution: None,
            rejections: 0,
            failure: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn row(&self, engine: &str, n: f64) -> Option<&Row> {
        self.rows.iter().find(|r| r.engine == engine && r.n == n)
    }
}

/// Per-trajectory entropies, indexed `[renyi][trajectory]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSamples {
    pub entropies: Vec<Vec<f64>>,
    pub rejections: u64,
}

/// ChaCha key from `(seed, point)`; the stream is the trajectory index.
fn point_rng(seed: u64, point: u64, trajectory: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trajectory);
    rng
}

/// Samples `count` trajectories at one geometry. Results depend only on
/// `(seed, point, trajectory index)`, not on the worker count.
pub fn sample_lattice(
    exec: &Executor,
    geom: &RingGeometry,
    cfg: &ExperimentConfig,
    policy: OutcomePolicy<'static>,
    point: u64,
    count: usize,
) -> Result<LatticeSamples, HarnessError> {
    let c = ground_state_correlation(geom.len(), cfg.filling)?;
    let sampler = TrajectorySampler::new(geom, &c, &cfg.renyi)?;
    let results: Vec<_> = exec.pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map_init(
                || sampler.clone(),
                |s, i| s.sample(policy, &mut point_rng(cfg.seed, point, i)),
            )
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut entropies = vec![Vec::with_capacity(count); cfg.renyi.len()];
    let mut rejections = 0;
    for r in results {
        rejections += r.rejections as u64;
        for (k, s) in r.entropies.into_iter().enumerate() {
            entropies[k].push(s);
        }
    }
    Ok(LatticeSamples {
        entropies,
        rejections,
    })
}

/// Exact cumulants of weighted values.
fn weighted_cumulants(values: &[(f64, f64)]) -> [f64; 3] {
    let total: f64 = values.iter().map(|v| v.0).sum();
    let k1 = values.iter().map(|&(w, s)| w * s).sum::<f64>() / total;
    let central = |k: i32| values.iter().map(|&(w, s)| w * (s - k1).powi(k)).sum::<f64>() / total;
    [k1, central(2), central(3)]
}

fn enumerated_rows(
    outcomes: &[EnumeratedOutcome],
    renyi: &[f64],
    uniform: bool,
    engine: &str,
) -> Vec<Row> {
    renyi
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let values: Vec<(f64, f64)> = outcomes
                .iter()
                .map(|o| (if uniform { 1.0 } else { o.born_probability }, o.entropies[k].1))
                .collect();
            Row::exact(engine, n, weighted_cumulants(&values))
        })
        .collect()
}

fn oracle_rows(
    geom: &RingGeometry,
    outcomes: &[EnumeratedOutcome],
    renyi: &[f64],
    uniform: bool,
    engine: &str,
) -> Result<Vec<Row>, HarnessError> {
    let oracle = StatevectorOracle::new(geom.len())?;
    let exact: Vec<_> = outcomes
        .iter()
        .map(|o| oracle.outcome(geom, &o.outcomes, renyi))
        .collect::<Result<_, _>>()?;
    Ok(renyi
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let values: Vec<(f64, f64)> = exact
                .iter()
                .map(|o| (if uniform { 1.0 } else { o.born_probability }, o.entropies[k].1))
                .collect();
            Row::exact(engine, n, weighted_cumulants(&values))
        })
        .collect())
}

fn sampled_rows(samples: &LatticeSamples, renyi: &[f64], engine: &str) -> Vec<Row> {
    renyi
        .iter()
        .zip(&samples.entropies)
        .map(|(&n, xs)| {
            let e = estimate_cumulants(xs);
            Row {
                engine: engine.into(),
                n,
                kappa: e.kappa.map(finite),
                err: e.err.map(finite),
            }
        })
        .collect()
}

fn compare(report: &mut StatReport, analytic: &str, lattice: &str) {
    let mut out = Vec::new();
    for a in report.rows.iter().filter(|r| r.engine == analytic) {
        if let Some(l) = report.row(lattice, a.n) {
            let mut z = [None; 3];
            for j in 0..3 {
                if let (Some(ka), Some(kl), Some(e)) = (a.kappa[j], l.kappa[j], l.err[j]) {
                    if e > 0.0 {
                        z[j] = Some((kl - ka) / e);
                    }
                }
            }
            out.push(Comparison { n: a.n, z });
        }
    }
    report.comparisons = out;
}

fn record_failure(report: &mut StatReport, err: HarnessError) {
    let msg = err.to_string();
    report.failure = Some(match report.failure.take() {
        Some(prev) => format!("{prev}; {msg}"),
        None => msg,
    });
}

fn mie_point(exec: &Executor, cfg: &ExperimentConfig, index: usize, point: &Point) -> StatReport {
    let start = Instant::now();
    let mut report = StatReport::new(ReportKind::Mie, cfg, point);
    if cfg.has_engine(Engine::Analytic) {
        for &n in &cfg.renyi {
            match CftParams::new(cfg.g, n, point.zeta).and_then(|p| mie_cumulants(&p)) {
                Ok(k) => report.rows.push(Row::exact("analytic", n, [k.kappa[0], k.kappa[1], k.kappa[2]])),
                Err(e) => record_failure(&mut report, e.into()),
            }
        }
    }
    if let (true, Some(geom)) = (cfg.has_engine(Engine::Lattice), point.geometry) {
        if let Err(e) = lattice_mie(exec, cfg, index, &geom, &mut report) {
            record_failure(&mut report, e);
        }
    }
    compare(&mut report, "analytic", "lattice");
    report.wall_time = start.elapsed();
    report
}

fn lattice_mie(
    exec: &Executor,
    cfg: &ExperimentConfig,
    index: usize,
    geom: &RingGeometry,
    report: &mut StatReport,
) -> Result<(), HarnessError> {
    if cfg.exhaustive {
        let c = ground_state_correlation(geom.len(), cfg.filling)?;
        let outcomes = enumerate_outcomes(geom, &c, &cfg.renyi)?;
        report.rows.extend(enumerated_rows(&outcomes, &cfg.renyi, false, "lattice-exact"));
        if geom.len() <= ORACLE_MAX_SITES && cfg.filling == 0.5 {
            report.rows.extend(oracle_rows(geom, &outcomes, &cfg.renyi, false, "oracle")?);
        }
        return Ok(());
    }
    let samples = sample_lattice(exec, geom, cfg, OutcomePolicy::Born, index as u64, cfg.trajectories)?;
    report.rows.extend(sampled_rows(&samples, &cfg.renyi, "lattice"));
    report.histograms = cfg
        .renyi
        .iter()
        .zip(&samples.entropies)
        .map(|(&n, xs)| HistogramSet {
            n,
            linear: Histogram::linear(xs, LINEAR_BINS),
            log: Histogram::log(xs, LOG_BINS, LOG_UPPER),
        })
        .collect();
    Ok(())
}

/// Cumulants of the Born-averaged entropy at every configured point.
/// Engine failures are recorded in the affected report.
pub fn run_sweep(exec: &Executor, cfg: &ExperimentConfig) -> Result<Vec<StatReport>, HarnessError> {
    cfg.validate()?;
    Ok(cfg
        .points()?
        .iter()
        .enumerate()
        .map(|(i, p)| mie_point(exec, cfg, i, p))
        .collect())
}

fn die_point(exec: &Executor, cfg: &ExperimentConfig, index: usize, point: &Point) -> StatReport {
    let start = Instant::now();
    let mut report = StatReport::new(ReportKind::Die, cfg, point);
    if cfg.has_engine(Engine::Analytic) {
        for &n in &cfg.renyi {
            match CftParams::new(cfg.g, n, point.zeta).and_then(|p| die(&p)) {
                Ok(v) => report.rows.push(Row {
                    engine: "analytic-die".into(),
                    n,
                    kappa: [Some(v), None, None],
                    err: [Some(0.0), None, None],
                }),
                Err(e) => record_failure(&mut report, e.into()),
            }
        }
    }
    if let (true, Some(geom)) = (cfg.has_engine(Engine::Lattice), point.geometry) {
        let run = || -> Result<(Vec<Row>, u64), HarnessError> {
            if cfg.exhaustive {
                let c = ground_state_correlation(geom.len(), cfg.filling)?;
                let outcomes = enumerate_outcomes(&geom, &c, &cfg.renyi)?;
                return Ok((enumerated_rows(&outcomes, &cfg.renyi, true, "lattice-uniform-exact"), 0));
            }
            let samples = sample_lattice(exec, &geom, cfg, OutcomePolicy::Uniform, index as u64, cfg.trajectories)?;
            Ok((sampled_rows(&samples, &cfg.renyi, "lattice-uniform"), samples.rejections))
        };
        match run() {
            Ok((rows, rejections)) => {
                report.rows.extend(rows);
                report.rejections = rejections;
            }
            Err(e) => record_failure(&mut report, e),
        }
    }
    compare(&mut report, "analytic-die", "lattice-uniform");
    report.wall_time = start.elapsed();
    report
}

/// Disorder-induced entanglement: uniform outcome weighting.
pub fn run_die(exec: &Executor, cfg: &ExperimentConfig) -> Result<Vec<StatReport>, HarnessError> {
    cfg.validate()?;
    Ok(cfg
        .points()?
        .iter()
        .enumerate()
        .map(|(i, p)| die_point(exec, cfg, i, p))
        .collect())
}

fn bin_comparisons(dens: &MieDensity, hist: &Histogram) -> Result<Vec<BinComparison>, HarnessError> {
    hist.edges
        .windows(2)
        .zip(hist.counts.iter().zip(&hist.density))
        .map(|(w, (&count, &lattice))| {
            Ok(BinComparison {
                lo: w[0],
                hi: w[1],
                count,
                lattice,
                analytic: dens.bin_density(w[0], w[1])?,
            })
        })
        .collect()
}

fn distribution_report(
    params: &CftParams,
    hist: Option<&HistogramSet>,
) -> Result<DistributionReport, HarnessError> {
    let dens = MieDensity::new(params)?;
    let (lo, hi) = dens.support();
    let guard = dens.guard();
    let curve = (1..256)
        .map(|k| lo + 0.5 * (hi - lo) * (1.0 - (std::f64::consts::PI * k as f64 / 256.0).cos()))
        .filter(|&s| s > lo + guard && s < hi - guard)
        .map(|s| Ok((s, dens.density(s)?)))
        .collect::<Result<_, HarnessError>>()?;
    let tails = dens.tail_fits()?;
    let (linear_bins, log_bins) = match hist {
        Some(h) => (
            bin_comparisons(&dens, &h.linear)?,
            match &h.log {
                Some(l) => bin_comparisons(&dens, l)?,
                None => Vec::new(),
            },
        ),
        None => (Vec::new(), Vec::new()),
    };
    Ok(DistributionReport {
        support: (lo, hi),
        guard,
        curve,
        linear_bins,
        log_bins,
        left_exponent: tails.left_exponent,
        right_exponent: tails.right_exponent,
        lognormal: tails.lognormal.map(|f| (f.mu, f.sigma)),
    })
}

fn distribution_point(exec: &Executor, cfg: &ExperimentConfig, index: usize, point: &Point) -> StatReport {
    let start = Instant::now();
    let mut report = StatReport::new(ReportKind::Distribution, cfg, point);
    if let (true, Some(_)) = (cfg.has_engine(Engine::Lattice), point.geometry) {
        if let Err(e) = lattice_mie(exec, cfg, index, &point.geometry.unwrap(), &mut report) {
            record_failure(&mut report, e);
        }
    }
    if cfg.has_engine(Engine::Analytic) {
        let hist = report.histograms.first();
        match CftParams::new(cfg.g, 1.0, point.zeta)
            .map_err(HarnessError::from)
            .and_then(|p| distribution_report(&p, hist))
        {
            Ok(d) => report.distribution = Some(d),
            Err(e) => record_failure(&mut report, e),
        }
    }
    report.wall_time = start.elapsed();
    report
}

/// Full distribution of the von Neumann entropy at each point: lattice
/// histograms against the analytic density.
pub fn run_distribution(exec: &Executor, cfg: &ExperimentConfig) -> Result<Vec<StatReport>, HarnessError> {
    let cfg = ExperimentConfig {
        renyi: vec![1.0],
        exhaustive: false,
        ..cfg.clone()
    };
    cfg.validate()?;
    Ok(cfg
        .points()?
        .iter()
        .enumerate()
        .map(|(i, p)| distribution_point(exec, &cfg, i, p))
        .collect())
}

pub fn total_wall_time(reports: &[StatReport]) -> Duration {
    reports.iter().map(|r| r.wall_time).sum()
}
