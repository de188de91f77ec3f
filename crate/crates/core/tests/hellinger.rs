use modulus_est::distributions::default_families;
use modulus_est::hellinger::{hel_to_mass, shift_distance, tv_distance, DEFAULT_TOL};
use modulus_est::{modulus, sq_hellinger, tensorize, tv_bounds, DensityModel};
use proptest::prelude::*;

/// Midpoint rule on a fine grid, independent of the adaptive quadrature.
fn riemann(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> f64 {
    let h = (hi - lo) / cells as f64;
    (0..cells).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

#[test]
fn gaussian_shift_closed_form() {
    let g = DensityModel::gaussian(0.0, 1.0).unwrap();
    for delta in [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let h = shift_distance(&g, delta, DEFAULT_TOL).unwrap();
        assert!((h - (1.0 - (-delta * delta / 8.0).exp())).abs() < 1e-8, "{delta}: {h}");
        let tv = tv_distance(&g, &g.shift(delta), DEFAULT_TOL).unwrap().value;
        assert!(
            (tv - (2.0 * std_normal_cdf(delta / 2.0) - 1.0)).abs() < 1e-8,
            "{delta}: {tv}"
        );
    }
}

#[test]
fn uniform_shift_closed_form() {
    let u = DensityModel::uniform(0.0, 1.0).unwrap();
    for delta in [1e-3, 0.25, 1.0, 1.9] {
        let h = shift_distance(&u, delta, DEFAULT_TOL).unwrap();
        assert!((h - delta / 2.0).abs() < 1e-8, "{delta}: {h}");
    }
    assert!((shift_distance(&u, 3.0, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn mixtures_match_a_plain_riemann_sum() {
    for (name, m) in default_families() {
        let q = m.shift(0.3);
        let h = sq_hellinger(&m, &q, DEFAULT_TOL).unwrap().value;
        let oracle = riemann(
            |x| {
                let d = m.pdf(x).sqrt() - q.pdf(x).sqrt();
                0.5 * d * d
            },
            -12.0,
            12.0,
            2_000_000,
        );
        assert!((h - oracle).abs() < 1e-5, "{name}: {h} vs {oracle}");
    }
}

#[test]
fn modulus_inverts_the_gaussian_distance() {
    let g = DensityModel::gaussian(0.0, 1.0).unwrap();
    for eps in [1e-4, 1e-2, 0.1, 0.5] {
        let w = modulus(&g, eps, 1e-9).unwrap();
        let exact = (-8.0 * (1.0 - eps).ln()).sqrt();
        assert!((w - exact).abs() < 1e-6, "{eps}: {w} vs {exact}");
    }
    assert_eq!(modulus(&g, 0.0, 1e-7).unwrap(), 0.0);
    assert!(modulus(&g, 1.0, 1e-7).unwrap().is_infinite());
}

#[test]
fn modulus_is_monotone_for_every_family() {
    for (name, m) in default_families() {
        let ws: Vec<f64> = [1e-3, 1e-2, 0.05, 0.2]
            .iter()
            .map(|&e| modulus(&m, e, 1e-7).unwrap())
            .collect();
        assert!(ws.windows(2).all(|w| w[0] <= w[1]), "{name}: {ws:?}");
    }
}

#[test]
fn rejects_out_of_range_inputs() {
    assert!(tensorize(1.5, 3).is_err());
    assert!(tensorize(0.5, 0).is_err());
    assert!(tv_bounds(-0.1).is_err());
    let g = DensityModel::gaussian(0.0, 1.0).unwrap();
    assert!(modulus(&g, -1.0, 1e-7).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensorization_identity(h in 0.0..=1.0f64, n in 1u32..500) {
        let t = tensorize(h, n).unwrap();
        let direct = 1.0 - (1.0 - h).powf(n as f64);
        prop_assert!((t - direct).abs() < 1e-12);
        prop_assert!(t >= h - 1e-15 && t <= 1.0);
    }

    #[test]
    fn tv_sandwich(fam in 0usize..6, delta in 0.0..3.0f64) {
        let m = &default_families()[fam].1;
        let q = m.shift(delta);
        let h = sq_hellinger(m, &q, DEFAULT_TOL).unwrap().value;
        let tv = tv_distance(m, &q, DEFAULT_TOL).unwrap().value;
        let (lo, hi) = tv_bounds(h).unwrap();
        prop_assert!(lo <= tv + 1e-8 && tv <= hi + 1e-8, "{} <= {} <= {}", lo, tv, hi);
    }

    #[test]
    fn symmetric_in_its_arguments(fam in 0usize..6, delta in -2.0..2.0f64) {
        let m = &default_families()[fam].1;
        let q = m.shift(delta);
        let a = sq_hellinger(m, &q, DEFAULT_TOL).unwrap().value;
        let b = sq_hellinger(&q, m, DEFAULT_TOL).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    /// A shift by delta moves at least the central mass P([-delta, delta]) up to constants.
    #[test]
    fn hellinger_tracks_central_mass(fam in 0usize..6, delta in 1e-3..0.5f64) {
        let m = &default_families()[fam].1;
        let (h, mass) = hel_to_mass(m, delta, DEFAULT_TOL).unwrap();
        prop_assert!(h > 0.0 && mass > 0.0);
        prop_assert!(h <= 2.0 * mass + 1e-9, "h = {} mass = {}", h, mass);
    }
}
