use modulus_est::bench::{
    bench_rows, parse_csv, replay_row, run_bench, summarize, summary_path, to_csv, BenchConfig, BenchDistribution,
    EstimatorKind,
};
use modulus_est::DensityModel;

fn config(estimator: EstimatorKind, names: &[&str], n_grid: Vec<usize>, trials: usize) -> BenchConfig {
    BenchConfig {
        distributions: names.iter().map(|n| BenchDistribution::named(n)).collect(),
        n_grid,
        trials,
        base_seed: 1000,
        estimator,
        ..BenchConfig::default()
    }
}

fn mean_error(cfg: &BenchConfig) -> f64 {
    let s = summarize(&bench_rows(cfg).unwrap());
    assert_eq!(s.len(), 1);
    s[0].mean_error
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let cfg = config(EstimatorKind::Fast, &["gaussian", "semicircle"], vec![200, 2000], 6);
    let a = to_csv(&bench_rows(&cfg).unwrap());
    let b = to_csv(&bench_rows(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 6);
    assert_eq!(parse_csv(&a).unwrap(), bench_rows(&cfg).unwrap());
}

#[test]
fn rows_replay_from_their_seeds() {
    let cfg = config(
        EstimatorKind::Fast,
        &["uniform", "gaussian_scale_mixture"],
        vec![500, 3000],
        5,
    );
    let rows = bench_rows(&cfg).unwrap();
    for row in rows.iter().step_by(3) {
        assert_eq!(replay_row(&cfg, row).unwrap(), row.error, "{row:?}");
    }
}

#[test]
fn sample_mean_matches_half_normal_mean() {
    // E|mean| = sqrt(2 / (pi n)) = 0.00798 at n = 1e4; 100 trials give a standard error near 6e-4
    let m = mean_error(&config(EstimatorKind::SampleMean, &["gaussian"], vec![10_000], 100));
    assert!((0.006..=0.011).contains(&m), "{m}");
}

#[test]
fn midrange_matches_laplace_mean() {
    // on [-1, 1] the midrange error is close to Laplace with scale 1/n, mean 1e-3 at n = 1e3
    let m = mean_error(&config(EstimatorKind::Midrange, &["uniform"], vec![1000], 100));
    assert!((0.0005..=0.0025).contains(&m), "{m}");
}

#[test]
fn custom_models_and_seeds_are_honored() {
    let mut cfg = config(EstimatorKind::SampleMedian, &[], vec![101], 3);
    cfg.distributions = vec![BenchDistribution::with_model(
        "shifted",
        DensityModel::gaussian(5.0, 1.0).unwrap(),
    )];
    let rows = bench_rows(&cfg).unwrap();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1000, 1001, 1002]);
    assert!(rows.iter().all(|r| r.error < 1.0 && r.runtime_ns == 0));
}

#[test]
fn run_bench_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(EstimatorKind::Fast, &["gaussian"], vec![100, 1000], 3);
    cfg.output_path = Some(dir.path().join("out.csv"));
    let outcome = run_bench(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv, to_csv(&outcome.rows));
    let summary = summary_path(&dir.path().join("out.csv"));
    assert!(summary.ends_with("out.summary.json"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(BenchConfig::from_json(r#"{"trials": 0}"#).is_err());
    assert!(BenchConfig::from_json(r#"{"bogus": 1}"#).is_err());
    assert!(BenchConfig::from_json(r#"{"n_grid": []}"#).is_err());
    let cfg = config(EstimatorKind::Tournament, &["not_a_family"], vec![1000], 1);
    assert!(bench_rows(&cfg).is_err());
    let ok = BenchConfig::from_json(r#"{"estimator": "midrange", "n_grid": [10], "trials": 2}"#).unwrap();
    assert_eq!(ok.distributions.len(), 6);
}
