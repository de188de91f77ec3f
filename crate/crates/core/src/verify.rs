//! Self-check suites behind the `verify` subcommands. Each check records the worst
//! observed value against its limit; a report passes when every check does.

use rand::Rng;
use serde::Serialize;

use crate::distributions::{default_families, rng_from_seed, DensityModel, DvParams, StepParams};
use crate::error::Result;
use crate::fast_estimator::{biggest_lower_bound, build_gamma_list, ell_values, smallest_upper_bound};
use crate::hellinger::{
    hel_to_mass, modulus, shift_distance, sq_hellinger, tensorize, tv_distance, DEFAULT_TOL, DEFAULT_TOL_DELTA,
};
use crate::lowerbound::{
    f_draws, f_integral, h_map, log_log_slope, max_abs_g_batch, s_w_eval, verify_dv, verify_pushforward,
    verify_step_modulus_bounds, verify_unbiased_marginal,
};
use crate::oracles::{enumerate_heavy_lower_bound, enumerate_heavy_upper_bound};
use crate::quadrature::integrate;
use crate::tournament::{
    all_duels, batch_plan, candidate_coverage, log_likelihood_table, majority_duel, select_champion,
    tournament_estimate, DuelRecord, DuelResult, TournamentConfig,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub measured: f64,
    /// Limit the measured value is compared against.
    pub limit: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= limit`.
    pub fn at_most(name: &str, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured <= limit,
            measured,
            limit,
            detail: detail.into(),
        }
    }

    /// Passes when `measured >= limit`.
    pub fn at_least(name: &str, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured >= limit,
            measured,
            limit,
            detail: detail.into(),
        }
    }

    /// Mismatch count that must be zero.
    pub fn none(name: &str, failures: usize, detail: impl Into<String>) -> Self {
        Self::at_most(name, failures as f64, 0.0, detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.into(),
            seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn random_model<R: Rng>(rng: &mut R) -> Result<DensityModel> {
    let mut pool: Vec<DensityModel> = default_families().into_iter().map(|(_, m)| m).collect();
    pool.push(DensityModel::triangle(0.0)?);
    pool.push(DensityModel::step(StepParams::random(0.125, rng)?, 0.0)?);
    let m = pool.swap_remove(rng.random_range(0..pool.len()));
    Ok(m.shift(rng.random_range(-2.0..2.0)))
}

/// Hellinger engine: tensorization, closed forms, TV sandwich, hel-to-mass, modulus
/// monotonicity and the Step bounds.
pub fn verify_hellinger(seed: u64) -> Result<VerifyReport> {
    let mut rng = rng_from_seed(seed);
    let mut checks = Vec::new();

    let mut bad = 0;
    for j in 0..=100 {
        let h = j as f64 / 100.0;
        bad += (tensorize(h, 1)? != h) as usize;
        bad += (tensorize(h, 2)? != 1.0 - (1.0 - h) * (1.0 - h)) as usize;
    }
    checks.push(Check::none(
        "tensorize_identity",
        bad,
        "n = 1 and n = 2 against the product formula, exact",
    ));

    let u = DensityModel::uniform(0.0, 1.0)?;
    let g = DensityModel::gaussian(0.0, 1.0)?;
    let mut uni_dev: f64 = 0.0;
    let mut gauss_dev: f64 = 0.0;
    for j in 1..=40 {
        let delta = j as f64 / 20.0;
        uni_dev = uni_dev.max((shift_distance(&u, delta, DEFAULT_TOL)? - delta / 2.0).abs());
        gauss_dev = gauss_dev.max((shift_distance(&g, delta, DEFAULT_TOL)? + (-delta * delta / 8.0).exp_m1()).abs());
    }
    checks.push(Check::at_most(
        "uniform_closed_form",
        uni_dev,
        1e-8,
        "|d_h^2 - delta/2|, delta in (0, 2]",
    ));
    checks.push(Check::at_most(
        "gaussian_closed_form",
        gauss_dev,
        1e-8,
        "|d_h^2 - (1 - exp(-delta^2/8))|, delta in (0, 2]",
    ));

    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let p = random_model(&mut rng)?;
        let q = p.shift(rng.random_range(0.0..3.0));
        let h = sq_hellinger(&p, &q, DEFAULT_TOL)?.value;
        let tv = tv_distance(&p, &q, DEFAULT_TOL)?.value;
        worst = worst
            .min(tv - h + DEFAULT_TOL)
            .min((2.0 * h).sqrt() + 2.0 * DEFAULT_TOL - tv);
    }
    checks.push(Check::at_least(
        "tv_sandwich",
        worst,
        0.0,
        "min slack of h <= TV <= sqrt(2h) + 2 tol over 200 random shift pairs",
    ));

    let unimodal = [
        DensityModel::triangle(0.0)?,
        DensityModel::gaussian(0.0, 1.0)?,
        DensityModel::step(StepParams::random(0.125, &mut rng)?, 0.0)?,
    ];
    let mut worst = f64::INFINITY;
    for m in &unimodal {
        for j in 1..=20 {
            let (h, mass) = hel_to_mass(m, j as f64 / 20.0, DEFAULT_TOL)?;
            worst = worst.min(mass + 1e-8 - h);
        }
    }
    checks.push(Check::at_least(
        "hel_to_mass",
        worst,
        0.0,
        "min of P([-delta, delta]) + 1e-8 - d_h^2",
    ));

    let mut worst = f64::INFINITY;
    for m in [&u, &g, &unimodal[2]] {
        let mut prev = 0.0;
        for j in 1..=12 {
            let d = modulus(m, j as f64 / 16.0, DEFAULT_TOL_DELTA)?;
            worst = worst.min(d + DEFAULT_TOL_DELTA - prev);
            prev = d;
        }
    }
    checks.push(Check::at_least(
        "modulus_monotone",
        worst,
        0.0,
        "min increment of omega(eps) + tol_delta",
    ));

    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let step = DensityModel::step(StepParams::random(0.125, &mut rng)?, 0.0)?;
        let delta: f64 = rng.random_range(0.0..0.6);
        worst = worst.min(2.0 * delta + 1e-8 - shift_distance(&step, delta, 1e-11)?);
    }
    checks.push(Check::at_least(
        "step_two_delta",
        worst,
        0.0,
        "min of 2 delta + 1e-8 - d_h^2 over 50 random (v, delta)",
    ));

    let eps = 0.125;
    let step = DensityModel::step(StepParams::random(eps, &mut rng)?, 0.0)?;
    let mut worst = f64::INFINITY;
    for j in -4..5 {
        let q = eps * eps / 32.0 * 2f64.powi(j);
        worst = worst.min(16.0 * q / eps - modulus(&step, q, 1e-9)?);
    }
    checks.push(Check::at_least(
        "step_modulus",
        worst,
        0.0,
        "min of 16 q / eps - omega(q) for q = eps^2/32 * 2^j, j in -4..=4, eps = 1/8",
    ));

    Ok(VerifyReport::new("hellinger", seed, checks))
}

/// Sample set of size `n`; tied instances draw from a coarse grid of 9 values.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, ties: bool) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            if ties {
                rng.random_range(-4..=4) as f64 * 0.5
            } else {
                let u: f64 = rng.random();
                (u * 6.0 - 3.0).powi(3) + rng.random_range(-0.5..0.5)
            }
        })
        .collect();
    x.sort_by(f64::total_cmp);
    x
}

/// Sweep-line bounds against the exhaustive enumeration on `cases` random instances,
/// every fifth one with tied values, for every gamma on the grid and every power-of-two `ell`.
pub fn verify_sweepline(cases: usize, seed: u64) -> Result<VerifyReport> {
    let mut rng = rng_from_seed(seed);
    let mut mismatches = 0usize;
    let mut comparisons = 0usize;
    let mut tied = 0usize;
    let mut first = String::new();
    for case in 0..cases {
        let n = rng.random_range(1..=200);
        let ties = case % 5 == 0;
        tied += ties as usize;
        let x = random_instance(&mut rng, n, ties);
        for &gamma in build_gamma_list::<f64>(n)?.as_slice() {
            for ell in ell_values(n) {
                let pairs = [
                    (
                        biggest_lower_bound(&x, gamma, ell)?,
                        enumerate_heavy_lower_bound(&x, gamma, ell)?,
                    ),
                    (
                        smallest_upper_bound(&x, gamma, ell)?,
                        enumerate_heavy_upper_bound(&x, gamma, ell)?,
                    ),
                ];
                for (fast, slow) in pairs {
                    comparisons += 1;
                    if fast != slow {
                        if mismatches == 0 {
                            first = format!("case {case}, n {n}, gamma {gamma}, ell {ell}: {fast} vs {slow}");
                        }
                        mismatches += 1;
                    }
                }
            }
        }
    }
    let detail = if mismatches == 0 {
        format!("{comparisons} exact comparisons over {cases} instances, {tied} with ties")
    } else {
        format!("{mismatches} of {comparisons} differ; first: {first}")
    };
    Ok(VerifyReport::new(
        "sweepline",
        seed,
        vec![Check::none("sweep_equals_enumeration", mismatches, detail)],
    ))
}

fn mass_error(m: &DensityModel) -> Result<f64> {
    let (lo, hi) = m.support(0.0);
    let r = integrate(|x| m.pdf(x), lo, hi, &m.breakpoints(), 1e-12)?;
    Ok((r.value - 1.0).abs())
}

/// Hard-instance constructions at width `eps`.
pub fn verify_lowerbound(eps: f64, seed: u64) -> Result<VerifyReport> {
    let mut rng = rng_from_seed(seed);
    let mut checks = Vec::new();

    let mut bad = 0;
    bad += (s_w_eval(eps / 4.0, eps, eps / 2.0)? != eps / 2.0) as usize;
    bad += (s_w_eval(0.0, eps, eps / 8.0)? != 0.0) as usize;
    bad += (s_w_eval(eps / 2.0, eps, eps - 1e-12)? != eps / 2.0) as usize;
    bad += ((h_map(1.2) - 0.2).abs() > 1e-15 || (h_map(-1.4) + 0.4).abs() > 1e-15 || h_map(0.5) != 0.5) as usize;
    checks.push(Check::none("branch_values", bad, "s_w and h at their defining points"));

    let v = StepParams::random(eps, &mut rng)?;
    let dv = DvParams::random(4, &mut rng)?;
    let models = [
        DensityModel::triangle(0.0)?,
        DensityModel::mod_triangle(eps, 0.0)?,
        DensityModel::step(v.clone(), 0.0)?,
        DensityModel::mod_step(v.clone(), 0.0)?,
        DensityModel::dv_uniform(dv.clone(), 0.0)?,
    ];
    let mut worst: f64 = 0.0;
    for m in &models {
        worst = worst.max(mass_error(m)?);
    }
    checks.push(Check::at_most(
        "normalization",
        worst,
        1e-8,
        "|mass - 1| for Tri, Mod-Tri, Step, Mod-Step, D_v",
    ));

    let mut grid: Vec<f64> = (0..62).map(|_| rng.random_range(-1.5..1.5)).collect();
    grid.extend([0.0, 1.5]);
    let r = verify_unbiased_marginal(eps, &grid)?;
    checks.push(Check::at_most(
        "unbiased_marginal",
        r.step_max_dev.max(r.mod_step_max_dev),
        1e-8,
        "max |E_v density - base density| over 64 points, Step and Mod-Step",
    ));

    let r = verify_pushforward(eps, rng.random())?;
    checks.push(Check::at_most(
        "pushforward",
        r.triangle_max_dev.max(r.step_max_dev),
        1e-9,
        "max cdf deviation of h(Mod-Tri) vs Tri and h(Mod-Step) vs Step, 512 points",
    ));

    let mut lower: f64 = f64::INFINITY;
    let mut upper: f64 = f64::INFINITY;
    for _ in 0..100 {
        let p = StepParams::random(eps, &mut rng)?;
        let delta = 10f64.powf(rng.random_range(-4.0..-0.3));
        let r = verify_step_modulus_bounds(&p, &[delta])?;
        lower = lower.min(r.min_lower_slack);
        upper = upper.min(r.min_upper_slack);
    }
    checks.push(Check::at_least(
        "step_modulus_lower",
        lower,
        -1e-8,
        "min of d_h^2 - eps min(delta, eps/2)/16 over 100 random (v, delta)",
    ));
    checks.push(Check::at_least(
        "step_two_delta",
        upper,
        -1e-8,
        "min of 2 delta - d_h^2 over the same pairs",
    ));

    let f = f_draws(eps, 200, rng.random())?;
    checks.push(Check::at_least(
        "f_at_least_one",
        f.min_f,
        1.0 - 1e-9,
        format!("min f(v, w) over 200 draws; {} below 1", f.below_one),
    ));
    let mut diag = f64::INFINITY;
    for _ in 0..50 {
        let p = StepParams::random(eps, &mut rng)?;
        diag = diag.min(f_integral(&p, &p)?.value);
    }
    checks.push(Check::at_least(
        "f_diagonal_at_least_one",
        diag,
        1.0 - 1e-9,
        "min f(v, v) over 50 draws",
    ));

    let g = f_draws(eps, 2000, rng.random())?;
    checks.push(Check::at_most(
        "mean_g_zero",
        g.mean_g.abs(),
        4.0 * g.std_error_g,
        "|mean g| over 2000 draws against 4 standard errors",
    ));

    let mut points = Vec::new();
    for e in [0.125, 0.0625, 0.03125] {
        points.push((e, max_abs_g_batch(e, 32)?));
    }
    checks.push(Check::at_least(
        "g_scaling_exponent",
        log_log_slope(&points),
        2.7,
        "slope of ln max |g_i| against ln eps, eps in {1/8, 1/16, 1/32}",
    ));

    let r = verify_dv(&dv)?;
    checks.push(Check::at_most(
        "dv_hellinger_equals_tv",
        r.hellinger_tv_max_dev,
        1e-8,
        "max |d_h^2 - TV|, T = 4",
    ));
    checks.push(Check::at_least(
        "dv_shift_bound",
        r.bound_min_slack,
        -1e-8,
        "min of (4T + 2) delta - d_h^2",
    ));
    checks.push(Check::at_most(
        "dv_interpolation",
        r.interpolation_max_dev,
        1e-8,
        "max midpoint deviation of TV from the chord on [m/T, (m+1)/T]",
    ));
    checks.push(Check::at_most(
        "dv_half_cell_interpolation",
        r.half_cell_interpolation_max_dev,
        1e-8,
        "same on [m/(2T), (m+1)/(2T)]",
    ));

    Ok(VerifyReport::new("lowerbound", seed, checks))
}

/// Tournament pieces: batch arithmetic, duel rules, champion selection, candidate
/// coverage and one seeded estimate.
pub fn verify_tournament(seed: u64) -> Result<VerifyReport> {
    let mut rng = rng_from_seed(seed);
    let mut checks = Vec::new();

    let cfg = |c_test, delta| TournamentConfig {
        c_test,
        delta,
        ..TournamentConfig::default()
    };
    let a = batch_plan(1000, &cfg(0.05, 0.1))?;
    let b = batch_plan(8, &cfg(0.99, 0.25))?;
    let bad = ((a.n_test, a.k_num_tests) != (5, 100)) as usize + ((b.n_test, b.k_num_tests) != (2, 2)) as usize;
    checks.push(Check::none(
        "batch_plan_examples",
        bad,
        "(1000, 0.05, 0.1) -> (5, 100); (8, 0.99, 0.25) -> (2, 2)",
    ));

    let rec = |i, j, result| DuelRecord {
        i,
        j,
        wins_i: 0,
        wins_j: 0,
        result,
    };
    let cycle = [
        rec(0, 2, DuelResult::IWins),
        rec(1, 2, DuelResult::JWins),
        rec(0, 1, DuelResult::JWins),
    ];
    let champ = select_champion(&[0.0, 1.0, 10.0], &cycle)?;
    checks.push(Check::at_most(
        "champion_cycle",
        champ.abs(),
        0.0,
        "candidates {0, 1, 10} in a cycle pick 0",
    ));

    let p = DensityModel::gaussian(0.0, 1.0)?;
    let n = 400;
    let draws = p.draw(n, &mut rng);
    let plan = batch_plan(n, &cfg(0.5, 0.05))?;
    let candidates = &draws[..n / 2];
    let table = log_likelihood_table(&p, candidates, &draws, &plan)?;
    let mut bad = 0;
    for c in (0..candidates.len()).step_by(7) {
        for (b, r) in plan.batch_index_ranges.iter().enumerate() {
            let direct: f64 = draws[r.clone()].iter().map(|&x| p.ln_pdf(x - candidates[c])).sum();
            bad += (table.rows[c][b] != direct) as usize;
        }
    }
    checks.push(Check::none(
        "table_recomputation",
        bad,
        "table entries equal direct sums",
    ));

    let duels = all_duels(&table, &plan);
    let mut bad = 0;
    for d in &duels {
        let r = majority_duel(&table, d.j, d.i, &plan);
        let swapped = match d.result {
            DuelResult::IWins => DuelResult::JWins,
            DuelResult::JWins => DuelResult::IWins,
            DuelResult::NoStrictMajority => DuelResult::NoStrictMajority,
        };
        bad += (r.result != swapped || r.wins_i != d.wins_j || r.wins_j != d.wins_i) as usize;
    }
    checks.push(Check::none("duel_antisymmetry", bad, format!("{} pairs", duels.len())));

    // list containing the true location: a champion that lost to it lost at least that far
    let mut list = candidates.to_vec();
    list.push(0.0);
    let table = log_likelihood_table(&p, &list, &draws, &plan)?;
    let duels = all_duels(&table, &plan);
    let champ = select_champion(&list, &duels)?;
    let ci = list.iter().position(|&c| c == champ).expect("champion is a candidate");
    let truth = list.len() - 1;
    let farthest = duels
        .iter()
        .filter_map(|d| match d.result {
            DuelResult::IWins if d.j == ci => Some(d.i),
            DuelResult::JWins if d.i == ci => Some(d.j),
            _ => None,
        })
        .map(|w| (list[w] - champ).abs())
        .fold(0.0, f64::max);
    let lost_to_truth = duels.iter().any(|d| {
        (d.i == ci && d.j == truth && d.result == DuelResult::JWins)
            || (d.j == ci && d.i == truth && d.result == DuelResult::IWins)
    });
    let gap = if lost_to_truth { champ.abs() - farthest } else { 0.0 };
    checks.push(Check::at_most(
        "warm_up_radius",
        gap,
        0.0,
        "|champion - mu| - farthest loss when the champion lost to mu",
    ));

    let cov = candidate_coverage(&DensityModel::triangle(0.0)?, 2000, 0.05, 500, rng.random())?;
    checks.push(Check::at_most(
        "candidate_coverage",
        cov.failure_rate,
        cov.threshold,
        format!(
            "{} of 500 runs with no first-half draw within {:.3e}",
            cov.failures, cov.radius
        ),
    ));

    // a single run exceeds 0.02 a large fraction of the time, so the median is checked
    let u = DensityModel::uniform(0.0, 1.0)?;
    let mut errors = Vec::with_capacity(21);
    for _ in 0..21 {
        let draws = u.draw(10_000, &mut rng);
        errors.push(tournament_estimate(&u, &draws, &TournamentConfig::default())?.abs());
    }
    errors.sort_by(f64::total_cmp);
    checks.push(Check::at_most(
        "uniform_estimate",
        errors[10],
        0.02,
        format!(
            "median |mu_hat| over 21 runs on Uniform(-1, 1), n = 10^4; max {:.3e}",
            errors[20]
        ),
    ));

    Ok(VerifyReport::new("tournament", seed, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweepline_suite_passes() {
        let r = verify_sweepline(30, 9).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn check_directions() {
        assert!(Check::at_most("a", 1.0, 1.0, "").passed);
        assert!(!Check::at_most("a", 1.1, 1.0, "").passed);
        assert!(Check::at_least("a", 1.0, 1.0, "").passed);
        assert!(!Check::none("a", 1, "").passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0, "").passed);
    }

    #[test]
    fn tied_instances_are_tied() {
        let mut rng = rng_from_seed(1);
        let x = random_instance(&mut rng, 50, true);
        assert!(x.windows(2).any(|w| w[0] == w[1]));
        assert!(x.windows(2).all(|w| w[0] <= w[1]));
    }
}
