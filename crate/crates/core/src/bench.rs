//! Monte-Carlo error benchmark: estimator error against sample size for a set of
//! distribution families, written as CSV with a per-cell summary.
//!
//! Trial `t` of every cell draws from the stream seeded with `base_seed + t`, so a row's
//! seed regenerates its sample set. Rows are sorted before writing; with timing off the
//! CSV is byte-identical across runs.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{default_families, rng_from_seed, DensityModel};
use crate::error::{Error, Result};
use crate::fast_estimator::estimate;
use crate::samples::SampleSet;
use crate::tournament::{tournament_estimate, TournamentConfig};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "MODULUS_EST_THREADS";

pub const CSV_HEADER: &str = "distribution,n,trial,seed,error,runtime_ns,estimator";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Fast,
    Tournament,
    SampleMean,
    SampleMedian,
    Midrange,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Fast,
        EstimatorKind::Tournament,
        EstimatorKind::SampleMean,
        EstimatorKind::SampleMedian,
        EstimatorKind::Midrange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Fast => "fast",
            EstimatorKind::Tournament => "tournament",
            EstimatorKind::SampleMean => "sample_mean",
            EstimatorKind::SampleMedian => "sample_median",
            EstimatorKind::Midrange => "midrange",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = EstimatorKind::ALL.iter().map(|k| k.name()).collect();
            Error::Config(format!("unknown estimator '{s}', expected one of {}", names.join(", ")))
        })
    }
}

/// A benchmarked family. Without `model` the name must be one of [`default_families`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchDistribution {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<DensityModel>,
}

impl BenchDistribution {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            model: None,
        }
    }

    pub fn with_model(name: &str, model: DensityModel) -> Self {
        Self {
            name: name.to_string(),
            model: Some(model),
        }
    }

    fn resolve(&self) -> Option<DensityModel> {
        self.model.clone().or_else(|| {
            default_families()
                .into_iter()
                .find(|(n, _)| *n == self.name)
                .map(|(_, m)| m)
        })
    }
}

fn default_distributions() -> Vec<BenchDistribution> {
    default_families()
        .into_iter()
        .map(|(name, _)| BenchDistribution { name, model: None })
        .collect()
}

fn default_n_grid() -> Vec<usize> {
    vec![1_000, 10_000, 100_000]
}

fn default_trials() -> usize {
    100
}

fn default_estimator() -> EstimatorKind {
    EstimatorKind::Fast
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_distributions")]
    pub distributions: Vec<BenchDistribution>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorKind,
    /// CSV destination; the summary goes next to it with extension `summary.json`.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub tournament: TournamentConfig,
    /// Record wall-clock runtimes. Off by default so output stays reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            distributions: default_distributions(),
            n_grid: default_n_grid(),
            trials: default_trials(),
            base_seed: 0,
            estimator: default_estimator(),
            output_path: None,
            tournament: TournamentConfig::default(),
            timing: false,
        }
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config(
                "n_grid must be a non-empty list of positive counts".into(),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "n_grid must be strictly ascending, got {:?}",
                self.n_grid
            )));
        }
        if self.distributions.is_empty() {
            return Err(Error::Config("no distributions to benchmark".into()));
        }
        if self.base_seed.checked_add(self.trials as u64).is_none() {
            return Err(Error::Config("base_seed + trials overflows".into()));
        }
        if self.estimator == EstimatorKind::Tournament {
            self.tournament.validate()?;
        }
        self.models().map(|_| ())
    }

    fn models(&self) -> Result<Vec<DensityModel>> {
        self.distributions
            .iter()
            .map(|d| {
                d.resolve().ok_or_else(|| {
                    let what = if self.estimator == EstimatorKind::Tournament {
                        "the tournament estimator needs its shape"
                    } else {
                        "nothing to sample from"
                    };
                    Error::Config(format!("distribution '{}' has no model: {what}", d.name))
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub distribution: String,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// `|mu_hat - mu|` with `mu` the model's center of symmetry.
    pub error: f64,
    pub runtime_ns: u64,
    pub estimator: EstimatorKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub distribution: String,
    pub n: usize,
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub mean_runtime_ns: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<CellSummary>,
}

/// Location estimate of `estimator` on the `n` draws seeded by `seed`.
pub fn run_estimator(
    estimator: EstimatorKind,
    model: &DensityModel,
    n: usize,
    seed: u64,
    tournament: &TournamentConfig,
) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let draws = model.draw(n, &mut rng);
    if estimator == EstimatorKind::Tournament {
        return tournament_estimate(model, &draws, tournament);
    }
    let set = SampleSet::from_unsorted(draws)?;
    Ok(match estimator {
        EstimatorKind::Fast => estimate(&set)?.mu_hat,
        EstimatorKind::SampleMean => set.values().iter().sum::<f64>() / n as f64,
        EstimatorKind::SampleMedian => set.median(),
        EstimatorKind::Midrange => 0.5 * set.min() + 0.5 * set.max(),
        EstimatorKind::Tournament => unreachable!(),
    })
}

/// Rayon pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let cap: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        let available = std::thread::available_parallelism().map_or(1, |p| p.get());
        builder = builder.num_threads(cap.min(available));
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// Runs every (distribution, n, trial) cell and returns sorted rows. Nothing is written.
pub fn bench_rows(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let models = cfg.models()?;
    let jobs: Vec<(usize, usize, usize)> = (0..models.len())
        .flat_map(|d| {
            cfg.n_grid
                .iter()
                .flat_map(move |&n| (0..cfg.trials).map(move |t| (d, n, t)))
        })
        .collect();
    let pool = thread_pool()?;
    let mut rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, n, trial)| {
                let model = &models[d];
                let seed = cfg.base_seed + trial as u64;
                let start = Instant::now();
                let mu_hat = run_estimator(cfg.estimator, model, n, seed, &cfg.tournament)?;
                let runtime_ns = if cfg.timing {
                    u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX)
                } else {
                    0
                };
                Ok((
                    d,
                    BenchRow {
                        distribution: cfg.distributions[d].name.clone(),
                        n,
                        trial,
                        seed,
                        error: (mu_hat - model.mode()).abs(),
                        runtime_ns,
                        estimator: cfg.estimator,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|(da, a), (db, b)| da.cmp(db).then(a.n.cmp(&b.n)).then(a.trial.cmp(&b.trial)));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Recomputes a row's error from its seed.
pub fn replay_row(cfg: &BenchConfig, row: &BenchRow) -> Result<f64> {
    let d = cfg
        .distributions
        .iter()
        .find(|d| d.name == row.distribution)
        .ok_or_else(|| Error::Config(format!("distribution '{}' not in config", row.distribution)))?;
    let model = d
        .resolve()
        .ok_or_else(|| Error::Config(format!("distribution '{}' has no model", d.name)))?;
    let mu_hat = run_estimator(row.estimator, &model, row.n, row.seed, &cfg.tournament)?;
    Ok((mu_hat - model.mode()).abs())
}

fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Mean and median error per (distribution, n, estimator), in first-appearance order.
pub fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(String, usize, EstimatorKind, Vec<&BenchRow>)> = Vec::new();
    for r in rows {
        match cells
            .iter_mut()
            .find(|(d, n, e, _)| *d == r.distribution && *n == r.n && *e == r.estimator)
        {
            Some(c) => c.3.push(r),
            None => cells.push((r.distribution.clone(), r.n, r.estimator, vec![r])),
        }
    }
    cells
        .into_iter()
        .map(|(distribution, n, estimator, rs)| {
            let k = rs.len() as f64;
            CellSummary {
                distribution,
                n,
                estimator,
                trials: rs.len(),
                mean_error: rs.iter().map(|r| r.error).sum::<f64>() / k,
                median_error: median_of(rs.iter().map(|r| r.error).collect()),
                mean_runtime_ns: rs.iter().map(|r| r.runtime_ns as f64).sum::<f64>() / k,
            }
        })
        .collect()
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.16e},{},{}\n",
            r.distribution, r.n, r.trial, r.seed, r.error, r.runtime_ns, r.estimator
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, h)) => {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected header '{CSV_HEADER}', got '{h}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty CSV".into(),
            })
        }
    }
    lines
        .map(|(i, line)| {
            let bad = |message: String| Error::Parse { line: i + 1, message };
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 7 {
                return Err(bad(format!("expected 7 fields, got {}", f.len())));
            }
            let num = |s: &str, what: &str| -> Result<u64> { s.parse().map_err(|_| bad(format!("bad {what} '{s}'"))) };
            Ok(BenchRow {
                distribution: f[0].to_string(),
                n: num(f[1], "n")? as usize,
                trial: num(f[2], "trial")? as usize,
                seed: num(f[3], "seed")?,
                error: f[4].parse().map_err(|_| bad(format!("bad error '{}'", f[4])))?,
                runtime_ns: num(f[5], "runtime_ns")?,
                estimator: f[6].parse().map_err(|e: Error| bad(e.to_string()))?,
            })
        })
        .collect()
}

/// Summary path that goes with a CSV path: `out.csv` -> `out.summary.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}

/// Writes `contents` through a temporary sibling and a rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs the benchmark and, if `output_path` is set, writes the CSV and summary JSON.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    let rows = bench_rows(cfg)?;
    let summary = summarize(&rows);
    if let Some(path) = &cfg.output_path {
        write_atomic(path, to_csv(&rows).as_bytes())?;
        let json = serde_json::to_string_pretty(&summary)?;
        write_atomic(&summary_path(path), json.as_bytes())?;
    }
    Ok(BenchOutcome { rows, summary })
}
