//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Tolerances and seeds are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use modulus_est::bench::{bench_rows, BenchConfig, BenchDistribution, EstimatorKind};
use modulus_est::distributions::rng_from_seed;
use modulus_est::tournament::{candidate_coverage, tournament_report};
use modulus_est::verify::{random_instance, verify_hellinger, verify_lowerbound, verify_sweepline, VerifyReport};
use modulus_est::{estimate, DensityModel, Samples, TournamentConfig};
use rand::Rng;

const SEED: u64 = 20_240_601;

// criterion 1
const SWEEP_CASES: usize = 1000;
const SWEEP_MIN_TIED: usize = 100;
const SWEEP_LIMIT: Duration = Duration::from_secs(60);
// criteria 2 to 4
const TRIALS: usize = 100;
const SMALL_N: usize = 1_000;
const MID_N: usize = 10_000;
const LARGE_N: usize = 100_000;
const UNIFORM_RATIO: f64 = 0.05;
const GAUSSIAN_RATIO: f64 = 0.3;
const GAUSSIAN_VS_MEAN: f64 = 3.0;
const MIXTURE_RATIO: f64 = 0.1;
const SCALING_LIMIT: Duration = Duration::from_secs(180);
// criterion 5
const PERF_N: usize = 1_000_000;
const PERF_LIMIT: Duration = Duration::from_secs(5);
// criterion 7
const LOWERBOUND_EPS: f64 = 0.125;
// criterion 8
const TOURNAMENT_MEDIAN: f64 = 0.02;
const TOURNAMENT_RATIO: f64 = 0.05;
const TOURNAMENT_LARGE_TRIALS: usize = 5;
const TOURNAMENT_VS_MEAN: f64 = 3.0;
const COVERAGE_RUNS: usize = 500;
const TOURNAMENT_LIMIT: Duration = Duration::from_secs(300);
// criterion 9
const EQUIVARIANCE_CASES: usize = 200;
const EQUIVARIANCE_REL: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn within(limit: Duration, elapsed: Duration) -> (bool, String) {
    (
        elapsed < limit,
        format!("{:.1} s < {} s", elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Median error per grid point for one family and estimator.
fn medians(name: &str, estimator: EstimatorKind, n_grid: &[usize], trials: usize, tcfg: TournamentConfig) -> Vec<f64> {
    let cfg = BenchConfig {
        distributions: vec![BenchDistribution::named(name)],
        n_grid: n_grid.to_vec(),
        trials,
        base_seed: SEED,
        estimator,
        tournament: tcfg,
        ..BenchConfig::default()
    };
    let rows = bench_rows(&cfg).expect("bench runs");
    n_grid
        .iter()
        .map(|&n| median(rows.iter().filter(|r| r.n == n).map(|r| r.error).collect()))
        .collect()
}

fn report_outcome(r: &VerifyReport) -> Outcome {
    let failed: Vec<String> = r
        .failed_checks()
        .map(|c| format!("{} ({:.3e} vs {:.3e})", c.name, c.measured, c.limit))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} checks", r.checks.len())
    } else {
        format!(
            "{} of {} checks failed: {}",
            failed.len(),
            r.checks.len(),
            failed.join(", ")
        )
    };
    Outcome::new(r.passed, detail)
}

fn c1_sweepline() -> Outcome {
    let start = Instant::now();
    let r = verify_sweepline(SWEEP_CASES, SEED).expect("sweep-line suite runs");
    let (fast, time) = within(SWEEP_LIMIT, start.elapsed());
    let tied = SWEEP_CASES / 5;
    let c = &r.checks[0];
    Outcome::new(
        r.passed && fast && tied >= SWEEP_MIN_TIED,
        format!("{}; {time}", c.detail),
    )
}

fn c2_uniform() -> Outcome {
    let start = Instant::now();
    let m = medians(
        "uniform",
        EstimatorKind::Fast,
        &[SMALL_N, LARGE_N],
        TRIALS,
        TournamentConfig::default(),
    );
    let ratio = m[1] / m[0];
    let (fast, time) = within(SCALING_LIMIT, start.elapsed());
    Outcome::new(
        ratio <= UNIFORM_RATIO && fast,
        format!(
            "median {:.3e} -> {:.3e}, ratio {ratio:.4} <= {UNIFORM_RATIO}; {time}",
            m[0], m[1]
        ),
    )
}

fn c3_gaussian() -> Outcome {
    let start = Instant::now();
    let m = medians(
        "gaussian",
        EstimatorKind::Fast,
        &[SMALL_N, MID_N, LARGE_N],
        TRIALS,
        TournamentConfig::default(),
    );
    let mean = medians(
        "gaussian",
        EstimatorKind::SampleMean,
        &[MID_N],
        TRIALS,
        TournamentConfig::default(),
    )[0];
    let ratio = m[2] / m[0];
    let vs_mean = m[1] / mean;
    let (fast, time) = within(SCALING_LIMIT, start.elapsed());
    Outcome::new(
        ratio <= GAUSSIAN_RATIO && vs_mean <= GAUSSIAN_VS_MEAN && fast,
        format!(
            "ratio {ratio:.4} <= {GAUSSIAN_RATIO}; at 1e4 {:.3e} vs mean {mean:.3e} ({vs_mean:.2}x <= {GAUSSIAN_VS_MEAN}); {time}",
            m[1]
        ),
    )
}

fn c4_mixture() -> Outcome {
    let start = Instant::now();
    let grid = [SMALL_N, LARGE_N];
    let name = "gauss_uniform_mixture";
    let m = medians(name, EstimatorKind::Fast, &grid, TRIALS, TournamentConfig::default());
    let b = medians(
        name,
        EstimatorKind::SampleMedian,
        &grid,
        TRIALS,
        TournamentConfig::default(),
    );
    let ratio = m[1] / m[0];
    let base = b[1] / b[0];
    let (fast, time) = within(SCALING_LIMIT, start.elapsed());
    Outcome::new(
        ratio <= MIXTURE_RATIO && ratio < base && fast,
        format!("ratio {ratio:.4} <= {MIXTURE_RATIO}, sample median ratio {base:.4}; {time}"),
    )
}

fn c5_performance() -> Outcome {
    let model = DensityModel::gaussian(0.0, 1.0).unwrap();
    let s = model.sample(PERF_N, SEED).expect("sampling works");
    let start = Instant::now();
    let r = estimate(&s).expect("estimate runs");
    let (fast, time) = within(PERF_LIMIT, start.elapsed());
    Outcome::new(fast, format!("n = 1e6, mu_hat {:.3e}; {time}", r.mu_hat))
}

fn c8_tournament() -> Outcome {
    let start = Instant::now();
    let plain = TournamentConfig::default();
    let pruned = TournamentConfig {
        prune_candidates: true,
        ..plain
    };
    let mid = medians("uniform", EstimatorKind::Tournament, &[MID_N], TRIALS, plain)[0];
    let small = medians("uniform", EstimatorKind::Tournament, &[SMALL_N], TRIALS, plain)[0];
    let large = medians(
        "uniform",
        EstimatorKind::Tournament,
        &[LARGE_N],
        TOURNAMENT_LARGE_TRIALS,
        pruned,
    )[0];
    let ratio = large / small;
    let gauss = medians("gaussian", EstimatorKind::Tournament, &[MID_N], TRIALS, plain)[0];
    let mean = medians("gaussian", EstimatorKind::SampleMean, &[MID_N], TRIALS, plain)[0];
    let uniform = DensityModel::uniform(0.0, 1.0).unwrap();
    let cov = candidate_coverage(&uniform, MID_N, plain.delta, COVERAGE_RUNS, SEED).expect("coverage runs");
    let (fast, time) = within(TOURNAMENT_LIMIT, start.elapsed());
    Outcome::new(
        mid <= TOURNAMENT_MEDIAN
            && ratio <= TOURNAMENT_RATIO
            && gauss <= TOURNAMENT_VS_MEAN * mean
            && cov.passed()
            && fast,
        format!(
            "uniform 1e4 median {mid:.3e} <= {TOURNAMENT_MEDIAN}; ratio {ratio:.4} <= {TOURNAMENT_RATIO} \
             ({TOURNAMENT_LARGE_TRIALS} pruned trials at 1e5); gaussian {gauss:.3e} vs mean {mean:.3e} \
             ({:.2}x <= {TOURNAMENT_VS_MEAN}); coverage {:.3} <= {:.3}; {time}",
            gauss / mean,
            cov.failure_rate,
            cov.threshold
        ),
    )
}

fn c9_equivariance() -> Outcome {
    let mut rng = rng_from_seed(SEED);
    let mut bad = Vec::new();
    let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= EQUIVARIANCE_REL * scale;
    for case in 0..EQUIVARIANCE_CASES {
        let n = rng.random_range(1..=200);
        let x = random_instance(&mut rng, n, case % 5 == 0);
        let c: f64 = rng.random_range(-100.0..100.0);
        let s = Samples::from_sorted(x).unwrap();
        let scale = s.max().abs().max(s.min().abs()) + c.abs();
        let a = estimate(&s).unwrap().mu_hat;
        if estimate(&s.reflected()).unwrap().mu_hat != -a {
            bad.push(format!("fast reflection case {case}"));
        }
        if !close(estimate(&s.translated(c)).unwrap().mu_hat, a + c, scale) {
            bad.push(format!("fast translation case {case}"));
        }
    }
    let model = DensityModel::gaussian(0.0, 1.0).unwrap();
    let cfg = TournamentConfig {
        c_test: 0.2,
        ..TournamentConfig::default()
    };
    for case in 0..EQUIVARIANCE_CASES {
        let n = rng.random_range(400..=1200);
        let draws = model.draw(n, &mut rng);
        let c: f64 = rng.random_range(-100.0..100.0);
        let a = tournament_report(&model, &draws, &cfg).unwrap();
        let flipped: Vec<f64> = draws.iter().map(|x| -x).collect();
        if tournament_report(&model, &flipped, &cfg).unwrap().mu_hat != -a.mu_hat {
            bad.push(format!("tournament reflection case {case}"));
        }
        let moved: Vec<f64> = draws.iter().map(|x| x + c).collect();
        let scale = a.mu_hat.abs() + c.abs();
        if !close(
            tournament_report(&model, &moved, &cfg).unwrap().mu_hat,
            a.mu_hat + c,
            scale,
        ) {
            bad.push(format!("tournament translation case {case}"));
        }
    }
    let detail = if bad.is_empty() {
        format!("{EQUIVARIANCE_CASES} instances per estimator, reflection exact, translation to {EQUIVARIANCE_REL:e}")
    } else {
        format!("{} violations; first {}", bad.len(), bad[0])
    };
    Outcome::new(bad.is_empty(), detail)
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("1 sweep-line equals enumeration", c1_sweepline),
        ("2 fast estimator scaling, uniform", c2_uniform),
        ("3 fast estimator scaling, gaussian", c3_gaussian),
        ("4 fast estimator scaling, mixture", c4_mixture),
        ("5 fast estimator at n = 1e6", c5_performance),
        ("6 hellinger engine", || {
            report_outcome(&verify_hellinger(SEED).expect("suite runs"))
        }),
        ("7 lower-bound lab", || {
            report_outcome(&verify_lowerbound(LOWERBOUND_EPS, SEED).expect("suite runs"))
        }),
        ("8 tournament estimator", c8_tournament),
        ("9 equivariance", c9_equivariance),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        failures += !o.passed as usize;
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
