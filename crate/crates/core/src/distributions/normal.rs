use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

pub(crate) fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub(crate) fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `P(Z > z)`.
pub(crate) fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `z` with `P(Z > z) = tail`, for `tail` in `(0, 1/2]`.
pub(crate) fn upper_quantile(tail: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `int_{-inf}^{t} Phi(s / sigma) ds`.
pub(crate) fn integrated_cdf(t: f64, sigma: f64) -> f64 {
    let z = t / sigma;
    t * cdf(z) + sigma * pdf(z)
}
