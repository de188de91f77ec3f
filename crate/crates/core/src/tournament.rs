//! Known-shape location estimation by a likelihood tournament.
//!
//! The first half of the draws serve as candidate centers. The second half is cut
//! into `k` batches of `n_test` samples; on each batch two candidates compare their
//! log-likelihoods, and a candidate wins a duel when it has the strictly larger
//! likelihood on a strict majority of batches. An undefeated candidate is returned if
//! there is one; otherwise the candidate whose farthest loss is nearest.
//!
//! Candidates are taken in draw order, so callers holding sorted data should shuffle
//! it first.

use std::ops::Range;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{rng_from_seed, DensityModel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TournamentConfig {
    pub c_test: f64,
    pub delta: f64,
    pub prune_candidates: bool,
    pub prune_window_mult: f64,
}

impl Default for TournamentConfig {
    fn default() -> Self {
        Self {
            c_test: 0.05,
            delta: 0.05,
            prune_candidates: false,
            prune_window_mult: 4.0,
        }
    }
}

impl TournamentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_test > 0.0 && self.c_test < 1.0) {
            return Err(Error::Config(format!("c_test = {} outside (0, 1)", self.c_test)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::Config(format!("delta = {} outside (0, 1/2)", self.delta)));
        }
        if self.prune_candidates && !(self.prune_window_mult > 0.0 && self.prune_window_mult.is_finite()) {
            return Err(Error::Config(format!(
                "prune_window_mult = {} must be positive",
                self.prune_window_mult
            )));
        }
        Ok(())
    }

    /// Whether `sqrt(n) >= 6 ln(2 / delta)`, the regime the guarantee is stated for.
    pub fn sample_size_adequate(&self, n: usize) -> bool {
        (n as f64).sqrt() >= 6.0 * (2.0 / self.delta).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchPlan {
    pub n_test: usize,
    pub k_num_tests: usize,
    /// Consecutive, disjoint ranges of draw indices in the second half.
    pub batch_index_ranges: Vec<Range<usize>>,
}

/// `n_test = floor(c_test n / ln(n / delta))`, `k = floor(n / (2 n_test))`, batches laid
/// out consecutively from index `floor(n / 2)`.
pub fn batch_plan(n: usize, cfg: &TournamentConfig) -> Result<BatchPlan> {
    cfg.validate()?;
    if n < 4 {
        return Err(Error::Config(format!("tournament needs at least 4 samples, got {n}")));
    }
    let nf = n as f64;
    let n_test = (cfg.c_test * nf / (nf / cfg.delta).ln()).floor() as usize;
    if n_test == 0 {
        return Err(Error::Config(format!(
            "n_test = floor(c_test * n / ln(n / delta)) = floor({}) is zero",
            cfg.c_test * nf / (nf / cfg.delta).ln()
        )));
    }
    let k = n / (2 * n_test);
    if k == 0 {
        return Err(Error::Config(format!(
            "k = floor(n / (2 n_test)) = floor({n} / {}) is zero",
            2 * n_test
        )));
    }
    let start = n / 2;
    let batch_index_ranges = (0..k).map(|b| start + b * n_test..start + (b + 1) * n_test).collect();
    Ok(BatchPlan {
        n_test,
        k_num_tests: k,
        batch_index_ranges,
    })
}

/// `rows[c][b] = sum over batch b of ln p(x - theta_c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodTable {
    pub rows: Vec<Vec<f64>>,
}

pub fn log_likelihood_table(
    p: &DensityModel,
    candidates: &[f64],
    draws: &[f64],
    plan: &BatchPlan,
) -> Result<LikelihoodTable> {
    if let Some(c) = candidates.iter().find(|c| !c.is_finite()) {
        return Err(Error::Domain(format!("candidate {c} is not finite")));
    }
    if let Some(r) = plan.batch_index_ranges.iter().find(|r| r.end > draws.len()) {
        return Err(Error::Domain(format!(
            "batch {r:?} exceeds the {} available draws",
            draws.len()
        )));
    }
    let rows = candidates
        .par_iter()
        .map(|&theta| {
            plan.batch_index_ranges
                .iter()
                .map(|r| p.ln_likelihood(&draws[r.clone()], theta))
                .collect()
        })
        .collect();
    Ok(LikelihoodTable { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DuelResult {
    IWins,
    JWins,
    NoStrictMajority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DuelRecord {
    pub i: usize,
    pub j: usize,
    pub wins_i: usize,
    pub wins_j: usize,
    pub result: DuelResult,
}

fn verdict(wins_i: usize, wins_j: usize, k: usize) -> DuelResult {
    if 2 * wins_i > k {
        DuelResult::IWins
    } else if 2 * wins_j > k {
        DuelResult::JWins
    } else {
        DuelResult::NoStrictMajority
    }
}

/// Counts batches where each side has strictly larger log-likelihood; ties, including
/// two `-inf` entries, count for neither.
pub fn majority_duel(table: &LikelihoodTable, i: usize, j: usize, plan: &BatchPlan) -> DuelRecord {
    let (ri, rj) = (&table.rows[i], &table.rows[j]);
    let wins_i = ri.iter().zip(rj).filter(|(a, b)| a > b).count();
    let wins_j = ri.iter().zip(rj).filter(|(a, b)| b > a).count();
    DuelRecord {
        i,
        j,
        wins_i,
        wins_j,
        result: verdict(wins_i, wins_j, plan.k_num_tests),
    }
}

/// Per-candidate outcome of all duels.
#[derive(Clone, Debug, PartialEq)]
struct ChampionTracker {
    beaten: Vec<bool>,
    farthest_loss: Vec<f64>,
}

impl ChampionTracker {
    fn new(m: usize) -> Self {
        Self {
            beaten: vec![false; m],
            farthest_loss: vec![0.0; m],
        }
    }

    fn record(&mut self, candidates: &[f64], winner: usize, loser: usize) {
        self.beaten[loser] = true;
        let d = (candidates[winner] - candidates[loser]).abs();
        if d > self.farthest_loss[loser] {
            self.farthest_loss[loser] = d;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.beaten.iter_mut().zip(other.beaten) {
            *a |= b;
        }
        for (a, b) in self.farthest_loss.iter_mut().zip(other.farthest_loss) {
            *a = a.max(b);
        }
        self
    }

    fn champion(&self, candidates: &[f64]) -> usize {
        if let Some(i) = self.beaten.iter().position(|b| !b) {
            return i;
        }
        (0..candidates.len())
            .min_by(|&a, &b| {
                self.farthest_loss[a]
                    .total_cmp(&self.farthest_loss[b])
                    .then(candidates[a].total_cmp(&candidates[b]))
                    .then(a.cmp(&b))
            })
            .expect("non-empty")
    }
}

/// Smallest-index undefeated candidate, else the one whose farthest loss is nearest
/// (ties: smaller value, then smaller index).
pub fn select_champion(candidates: &[f64], duels: &[DuelRecord]) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut t = ChampionTracker::new(candidates.len());
    for d in duels {
        match d.result {
            DuelResult::IWins => t.record(candidates, d.i, d.j),
            DuelResult::JWins => t.record(candidates, d.j, d.i),
            DuelResult::NoStrictMajority => {}
        }
    }
    Ok(candidates[t.champion(candidates)])
}

/// Every duel between distinct candidates, `i < j`.
pub fn all_duels(table: &LikelihoodTable, plan: &BatchPlan) -> Vec<DuelRecord> {
    let m = table.rows.len();
    (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .map(|(i, j)| majority_duel(table, i, j, plan))
        .collect()
}

/// Per-batch dense ranks of the table entries, stored candidate-major. Comparing ranks
/// gives the same strict order as comparing the log-likelihoods.
struct RankTable<R> {
    ranks: Vec<R>,
    k: usize,
}

impl<R: Copy + Ord + Send + Sync + TryFrom<usize>> RankTable<R> {
    fn new(table: &LikelihoodTable, k: usize) -> Self {
        assert!(k <= u16::MAX as usize, "too many batches for the rank table");
        let m = table.rows.len();
        let zero = R::try_from(0).ok().expect("0 fits");
        let mut ranks = vec![zero; m * k];
        let mut order: Vec<usize> = (0..m).collect();
        for b in 0..k {
            order.sort_by(|&x, &y| table.rows[x][b].total_cmp(&table.rows[y][b]));
            let mut rank = 0usize;
            for (pos, &c) in order.iter().enumerate() {
                if pos > 0 && table.rows[order[pos - 1]][b] != table.rows[c][b] {
                    rank += 1;
                }
                ranks[c * k + b] = R::try_from(rank).ok().expect("rank fits");
            }
        }
        Self { ranks, k }
    }

    fn row(&self, c: usize) -> &[R] {
        &self.ranks[c * self.k..(c + 1) * self.k]
    }

    fn tally(&self, candidates: &[f64]) -> ChampionTracker {
        let m = candidates.len();
        let k = self.k;
        (0..m)
            .into_par_iter()
            .fold(
                || ChampionTracker::new(m),
                |mut t, i| {
                    let ri = self.row(i);
                    for j in i + 1..m {
                        let rj = self.row(j);
                        // narrow counters keep the loop vectorized; k < 2^16 is checked in new()
                        let rj = &rj[..ri.len()];
                        let mut wi = 0u16;
                        let mut wj = 0u16;
                        for b in 0..ri.len() {
                            wi = wi.wrapping_add((ri[b] > rj[b]) as u16);
                            wj = wj.wrapping_add((rj[b] > ri[b]) as u16);
                        }
                        match verdict(wi as usize, wj as usize, k) {
                            DuelResult::IWins => t.record(candidates, i, j),
                            DuelResult::JWins => t.record(candidates, j, i),
                            DuelResult::NoStrictMajority => {}
                        }
                    }
                    t
                },
            )
            .reduce(|| ChampionTracker::new(m), ChampionTracker::merge)
    }
}

/// Indices of the candidates kept by pruning: a window of
/// `ceil(mult * sqrt(n) * ln n)` order statistics of the candidates around the one at
/// quantile `cdf(mode)` of `p`, returned in original order.
pub fn prune_window(p: &DensityModel, candidates: &[f64], n: usize, mult: f64) -> Vec<usize> {
    let m = candidates.len();
    let nf = n as f64;
    let width = ((mult * nf.sqrt() * nf.ln()).ceil() as usize).clamp(1, m);
    let mut by_value: Vec<usize> = (0..m).collect();
    by_value.sort_by(|&a, &b| candidates[a].total_cmp(&candidates[b]).then(a.cmp(&b)));
    let q = p.cdf(p.mode());
    let center = ((q * m as f64).floor() as usize).min(m - 1);
    let start = center.saturating_sub(width / 2).min(m - width);
    let mut keep = by_value[start..start + width].to_vec();
    keep.sort_unstable();
    keep
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TournamentReport {
    pub mu_hat: f64,
    pub plan: BatchPlan,
    pub candidates: usize,
    pub champion_index: usize,
    pub undefeated: bool,
    pub sample_size_adequate: bool,
}

/// Restores an exchangeable order to values stored sorted, with a fixed-seed shuffle.
/// The tournament splits its input by position, so sorted input must not be fed directly.
pub fn shuffle_draws(values: &mut [f64], seed: u64) {
    values.shuffle(&mut rng_from_seed(seed));
}

/// Runs the tournament on `draws` in draw order.
pub fn tournament_estimate(p: &DensityModel, draws: &[f64], cfg: &TournamentConfig) -> Result<f64> {
    Ok(tournament_report(p, draws, cfg)?.mu_hat)
}

pub fn tournament_report(p: &DensityModel, draws: &[f64], cfg: &TournamentConfig) -> Result<TournamentReport> {
    let n = draws.len();
    let plan = batch_plan(n, cfg)?;
    if let Some(x) = draws.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("sample {x} is not finite")));
    }
    let first_half = &draws[..n / 2];
    let kept: Vec<usize> = if cfg.prune_candidates {
        prune_window(p, first_half, n, cfg.prune_window_mult)
    } else {
        (0..first_half.len()).collect()
    };
    let candidates: Vec<f64> = kept.iter().map(|&i| first_half[i]).collect();
    let table = log_likelihood_table(p, &candidates, draws, &plan)?;
    let tracker = if candidates.len() <= u16::MAX as usize {
        RankTable::<u16>::new(&table, plan.k_num_tests).tally(&candidates)
    } else {
        RankTable::<u32>::new(&table, plan.k_num_tests).tally(&candidates)
    };
    let c = tracker.champion(&candidates);
    Ok(TournamentReport {
        mu_hat: candidates[c],
        candidates: candidates.len(),
        champion_index: kept[c],
        undefeated: !tracker.beaten[c],
        sample_size_adequate: cfg.sample_size_adequate(n),
        plan,
    })
}

/// Half-width `d` with `P(|X - mode| <= d) = mass`, by bisection.
pub fn central_radius(p: &DensityModel, mass: f64) -> f64 {
    let m = p.mode();
    let inside = |d: f64| p.cdf(m + d) - p.cdf(m - d);
    let (lo_s, hi_s) = p.support(1e-15);
    let (mut lo, mut hi) = (0.0, (hi_s - m).max(m - lo_s));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateCoverage {
    pub runs: usize,
    pub failures: usize,
    pub radius: f64,
    pub failure_rate: f64,
    /// `delta / 2 + 3 sqrt((delta/2)(1 - delta/2) / runs)`.
    pub threshold: f64,
}

impl CandidateCoverage {
    pub fn passed(&self) -> bool {
        self.failure_rate <= self.threshold
    }
}

/// Fraction of runs in which no first-half draw lands within the radius enclosing mass
/// `2 ln(2/delta) / n` around the center.
pub fn candidate_coverage(p: &DensityModel, n: usize, delta: f64, runs: usize, seed: u64) -> Result<CandidateCoverage> {
    if runs == 0 || n < 2 {
        return Err(Error::Parameter("need at least one run and two samples".into()));
    }
    let mass = 2.0 * (2.0 / delta).ln() / n as f64;
    if mass >= 1.0 {
        return Err(Error::Parameter(format!("mass {mass} is not below 1; n too small")));
    }
    let radius = central_radius(p, mass);
    let mode = p.mode();
    let mut failures = 0;
    for r in 0..runs {
        let mut rng = rng_from_seed(seed.wrapping_add(r as u64));
        let draws = p.draw(n / 2, &mut rng);
        if !draws.iter().any(|x| (x - mode).abs() <= radius) {
            failures += 1;
        }
    }
    let half = delta / 2.0;
    Ok(CandidateCoverage {
        runs,
        failures,
        radius,
        failure_rate: failures as f64 / runs as f64,
        threshold: half + 3.0 * (half * (1.0 - half) / runs as f64).sqrt(),
    })
}
