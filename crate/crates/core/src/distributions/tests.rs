use super::*;
use crate::quadrature::integrate;

fn all_models() -> Vec<DensityModel> {
    let mut rng = rng_from_seed(3);
    let mut out: Vec<DensityModel> = default_families().into_iter().map(|(_, m)| m).collect();
    out.push(DensityModel::gaussian(1.5, 0.3).unwrap());
    out.push(DensityModel::triangle(-0.25).unwrap());
    out.push(DensityModel::step(StepParams::random(0.125, &mut rng).unwrap(), 0.5).unwrap());
    out.push(DensityModel::mod_triangle(0.125, 0.0).unwrap());
    out.push(DensityModel::mod_step(StepParams::random(0.0625, &mut rng).unwrap(), -1.0).unwrap());
    out.push(DensityModel::dv_uniform(DvParams::random(5, &mut rng).unwrap(), 0.0).unwrap());
    out
}

#[test]
fn spot_values() {
    let tri = DensityModel::triangle(0.0).unwrap();
    assert_eq!(tri.pdf(0.0), 1.0);
    assert_eq!(tri.pdf(1.5), 0.0);
    let dv = DensityModel::dv_uniform(DvParams::new(2, vec![1, 0]).unwrap(), 0.0).unwrap();
    assert_eq!(dv.pdf(0.1), 1.0);
    assert_eq!(dv.pdf(0.6), 0.0);
    assert_eq!(dv.pdf(-0.8), 1.0);
    let step = DensityModel::step(StepParams::zeros(0.25).unwrap(), 0.0).unwrap();
    assert_eq!(step.pdf(0.1), 1.0);
    assert_eq!(step.pdf(0.2), 0.75);
    assert_eq!(DensityModel::gaussian(0.0, 1.0).unwrap().cdf(0.0), 0.5);
    assert_eq!(tri.cdf(0.0), 0.5);
    assert_eq!(DensityModel::uniform(0.0, 1.0).unwrap().cdf(0.5), 0.75);
    assert_eq!(tri.shift(2.0).pdf(2.0), 1.0);
}

#[test]
fn invalid_parameters() {
    assert!(StepParams::new(0.3, vec![0.0]).is_err());
    assert!(StepParams::new(0.25, vec![0.0]).is_err());
    assert!(StepParams::new(0.25, vec![0.0, 0.2]).is_err());
    assert!(DvParams::new(2, vec![1, 2]).is_err());
    assert!(DensityModel::gaussian(0.0, 0.0).is_err());
    assert!(DensityModel::mod_triangle(0.3, 0.0).is_err());
    assert!(DensityModel::mixture(vec![1.0], vec![]).is_err());
}

#[test]
fn densities_normalize() {
    for m in all_models() {
        let (lo, hi) = m.support(1e-14);
        let r = integrate(|x| m.pdf(x), lo, hi, &m.quadrature_breaks(1e-14), 1e-11).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{m:?}: {}", r.value);
        if let Some(mass) = m.piecewise_mass() {
            assert!((mass - 1.0).abs() < 1e-12, "{m:?}: {mass}");
        }
    }
}

#[test]
fn cdf_matches_integrated_pdf_and_quantile_inverts() {
    for m in all_models() {
        let (lo, hi) = m.support(1e-14);
        let breaks = m.quadrature_breaks(1e-14);
        for j in 1..20 {
            let x = lo + (hi - lo) * j as f64 / 20.0;
            let r = integrate(|t| m.pdf(t), lo, x, &breaks, 1e-12).unwrap();
            assert!((m.cdf(x) - r.value).abs() < 1e-8, "{m:?} at {x}");
        }
        for j in 1..100 {
            let u = j as f64 / 100.0;
            assert!((m.cdf(m.quantile(u)) - u).abs() <= 1e-8, "{m:?} at u = {u}");
        }
        let mut prev = 0.0;
        for j in 0..=400 {
            let c = m.cdf(lo - 1.0 + (hi - lo + 2.0) * j as f64 / 400.0);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(m.cdf(lo - 1e3), 0.0);
        assert!((m.cdf(hi + 1e3) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn symmetric_families_are_symmetric() {
    let mut rng = rng_from_seed(9);
    for m in all_models().into_iter().filter(DensityModel::is_symmetric) {
        let c = m.mode();
        for _ in 0..200 {
            let t: f64 = rng.random::<f64>() * 2.0;
            let (a, b) = (m.pdf(c + t), m.pdf(c - t));
            if c == 0.0 {
                assert_eq!(a, b, "{m:?} at {t}");
            } else {
                // c +- t is rounded differently on each side
                assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{m:?} at {t}");
            }
        }
    }
}

#[test]
fn step_batch_mass_is_independent_of_width() {
    let eps = 0.125;
    for w in [0.0, 0.01, 0.03, 0.0625] {
        let m = DensityModel::step(StepParams::new(eps, vec![w; 4]).unwrap(), 0.0).unwrap();
        for i in 0..4 {
            let lo = i as f64 * eps;
            let r = integrate(|x| m.pdf(x), lo, lo + eps, &m.breakpoints(), 1e-14).unwrap();
            let expected = eps * (1.0 - (i + 1) as f64 * eps) + eps * eps / 2.0;
            assert!((r.value - expected).abs() < 1e-12, "w {w} batch {i}");
        }
    }
}

#[test]
fn shift_composes_exactly() {
    for m in all_models() {
        let a = m.shift(0.3).shift(-1.1);
        for j in 0..50 {
            let x = -3.0 + 0.13 * j as f64;
            assert_eq!(m.shift(0.0).pdf(x), m.pdf(x));
            assert_eq!(m.shift(0.7).pdf(x), m.pdf(x - 0.7));
            assert!((a.pdf(x) - m.shift(0.3 - 1.1).pdf(x)).abs() < 1e-12);
        }
    }
}

#[test]
fn sampling_is_deterministic_and_sorted() {
    for m in all_models() {
        let a = m.sample(5, 7).unwrap();
        assert_eq!(a, m.sample(5, 7).unwrap());
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
    }
    assert!(matches!(
        DensityModel::triangle(0.0).unwrap().sample(0, 1),
        Err(Error::EmptySamples)
    ));
}

#[test]
fn uniform_sample_mean() {
    let s = DensityModel::uniform(0.0, 1.0).unwrap().sample(100_000, 1).unwrap();
    let mean = s.values().iter().sum::<f64>() / s.len() as f64;
    assert!(mean.abs() < 0.02);
}

#[test]
fn rand_step_support() {
    let mut rng = rng_from_seed(2);
    let m = DensityModel::step(StepParams::random(0.25, &mut rng).unwrap(), 0.0).unwrap();
    let s = m.sample(10_000, 4).unwrap();
    assert!(s.min() >= -1.0 && s.max() <= 1.0);
}

#[test]
fn samples_follow_the_cdf() {
    // Kolmogorov-Smirnov distance at n = 20000 stays far below 0.02
    for m in all_models() {
        let s = m.sample(20_000, 17).unwrap();
        let n = s.len() as f64;
        let ks = s
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = m.cdf(x);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "{m:?}: {ks}");
    }
}

#[test]
fn json_round_trip() {
    for m in all_models() {
        let m = m.shift(0.25);
        let text = serde_json::to_string(&m).unwrap();
        let back: DensityModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.pdf(0.1), m.pdf(0.1));
    }
    let bad = r#"{"kind":"step","params":{"eps":0.3,"v":[0.0]},"center":0.0}"#;
    assert!(serde_json::from_str::<DensityModel>(bad).is_err());
    let g: DensityModel = serde_json::from_str(r#"{"kind":"gaussian","mu":0.0,"sigma":1.0}"#).unwrap();
    assert_eq!(g, DensityModel::gaussian(0.0, 1.0).unwrap());
}

#[test]
fn ln_pdf_agrees_with_pdf() {
    for m in all_models() {
        for j in 0..40 {
            let x = -2.0 + 0.1 * j as f64;
            let (a, b) = (m.ln_pdf(x), m.pdf(x).ln());
            assert!(a == b || (a - b).abs() < 1e-12, "{m:?} at {x}: {a} vs {b}");
        }
    }
    let g = DensityModel::gaussian(0.0, 1.0).unwrap();
    assert!((g.ln_pdf(40.0) + 800.0 + normal::LN_SQRT_2PI).abs() < 1e-9);
}
