//! Squared Hellinger distance between density models, the total-variation
//! sandwich, tensorization and the translation modulus `omega(eps)`.

use serde::Serialize;

use crate::distributions::DensityModel;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_TOL_DELTA: f64 = 1e-7;
/// Mass dropped from each tail of an unbounded model before integrating.
pub const TAIL_MASS: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HellingerResult {
    pub value: f64,
    pub est_abs_error: f64,
    pub support_truncation: (f64, f64),
}

struct Domain {
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    dropped_mass: f64,
}

fn domain(p: &DensityModel, q: &DensityModel) -> Domain {
    let (plo, phi) = p.support(TAIL_MASS);
    let (qlo, qhi) = q.support(TAIL_MASS);
    let lo = plo.min(qlo);
    let hi = phi.max(qhi);
    let mut breaks = p.quadrature_breaks(TAIL_MASS);
    breaks.extend(q.quadrature_breaks(TAIL_MASS));
    let outside = |m: &DensityModel| m.cdf(lo) + (1.0 - m.cdf(hi));
    Domain {
        lo,
        hi,
        breaks,
        dropped_mass: outside(p) + outside(q),
    }
}

/// `1/2 * int (sqrt p - sqrt q)^2`, to absolute accuracy `tol` plus the truncated tail mass.
pub fn sq_hellinger(p: &DensityModel, q: &DensityModel, tol: f64) -> Result<HellingerResult> {
    let d = domain(p, q);
    let r = integrate(
        |x| {
            let diff = p.pdf(x).sqrt() - q.pdf(x).sqrt();
            0.5 * diff * diff
        },
        d.lo,
        d.hi,
        &d.breaks,
        tol,
    )?;
    Ok(HellingerResult {
        value: r.value.clamp(0.0, 1.0),
        est_abs_error: r.abs_error + 0.5 * d.dropped_mass,
        support_truncation: (d.lo, d.hi),
    })
}

/// Total variation `1/2 * int |p - q|`, same conventions as [`sq_hellinger`].
pub fn tv_distance(p: &DensityModel, q: &DensityModel, tol: f64) -> Result<HellingerResult> {
    let d = domain(p, q);
    let r = integrate(|x| 0.5 * (p.pdf(x) - q.pdf(x)).abs(), d.lo, d.hi, &d.breaks, tol)?;
    Ok(HellingerResult {
        value: r.value.clamp(0.0, 1.0),
        est_abs_error: r.abs_error + 0.5 * d.dropped_mass,
        support_truncation: (d.lo, d.hi),
    })
}

fn check_unit(h: f64) -> Result<()> {
    if (0.0..=1.0).contains(&h) {
        Ok(())
    } else {
        Err(Error::Domain(format!("squared Hellinger distance {h} outside [0, 1]")))
    }
}

/// Squared Hellinger distance between `n`-fold products: `1 - (1 - h)^n`.
pub fn tensorize(h: f64, n: u32) -> Result<f64> {
    check_unit(h)?;
    if n == 0 {
        return Err(Error::Parameter("product size must be at least 1".into()));
    }
    if n == 1 {
        return Ok(h);
    }
    Ok(1.0 - (1.0 - h).powi(n as i32))
}

/// `(h, min(1, sqrt(2h)))`: the range total variation can take given squared Hellinger `h`.
pub fn tv_bounds(h: f64) -> Result<(f64, f64)> {
    check_unit(h)?;
    Ok((h, (2.0 * h).sqrt().min(1.0)))
}

/// `d_h^2(P, P_delta)` for a translation pair.
pub fn shift_distance(model: &DensityModel, delta: f64, tol: f64) -> Result<f64> {
    Ok(sq_hellinger(model, &model.shift(delta), tol)?.value)
}

/// Hellinger-to-mass comparison for one shift: returns `(d_h^2(P, P_delta), P([-delta, delta]))`
/// around the model's mode.
pub fn hel_to_mass(model: &DensityModel, delta: f64, tol: f64) -> Result<(f64, f64)> {
    let h = shift_distance(model, delta, tol)?;
    let m = model.mode();
    Ok((h, model.cdf(m + delta) - model.cdf(m - delta)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulusOptions {
    pub tol: f64,
    pub tol_delta: f64,
    /// Search cap; `None` picks ten support diameters, or `1e6` for unbounded models.
    pub delta_max: Option<f64>,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            tol_delta: DEFAULT_TOL_DELTA,
            delta_max: None,
        }
    }
}

/// Result of a modulus evaluation. `delta` is `+inf` when the distance never exceeded
/// `eps` below the search cap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusQuery {
    pub model: DensityModel,
    pub eps: f64,
    pub delta: f64,
    /// The 8-point spot check found `delta -> d_h^2` decreasing somewhere and a dense scan was used.
    pub non_monotone: bool,
    pub evaluations: usize,
}

/// Largest shift `delta` with `d_h^2(P, P_delta) <= eps`.
pub fn modulus(model: &DensityModel, eps: f64, tol_delta: f64) -> Result<f64> {
    let opts = ModulusOptions {
        tol_delta,
        ..ModulusOptions::default()
    };
    Ok(modulus_query(model, eps, &opts)?.delta)
}

pub fn modulus_query(model: &DensityModel, eps: f64, opts: &ModulusOptions) -> Result<ModulusQuery> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("modulus needs eps >= 0, got {eps}")));
    }
    if !(opts.tol_delta > 0.0) {
        return Err(Error::Parameter("tol_delta must be positive".into()));
    }
    let mut evaluations = 0;
    let mut dist = |delta: f64| -> Result<f64> {
        evaluations += 1;
        shift_distance(model, delta, opts.tol)
    };
    let done = |delta: f64, non_monotone: bool, evaluations: usize| ModulusQuery {
        model: model.clone(),
        eps,
        delta,
        non_monotone,
        evaluations,
    };
    if eps == 0.0 {
        return Ok(done(0.0, false, 0));
    }
    if eps >= 1.0 {
        // d_h^2 never exceeds 1
        return Ok(done(f64::INFINITY, false, 0));
    }

    let delta_max = opts.delta_max.unwrap_or_else(|| match model.bounded_support() {
        Some((lo, hi)) => 10.0 * (hi - lo),
        None => 1e6,
    });
    let (slo, shi) = model.support(1e-3);
    let mut hi = ((shi - slo) / 1024.0).max(opts.tol_delta);
    let mut lo = 0.0;
    loop {
        if dist(hi)? > eps {
            break;
        }
        lo = hi;
        if hi >= delta_max {
            return Ok(done(f64::INFINITY, false, evaluations));
        }
        hi = (2.0 * hi).min(delta_max);
    }

    // spot check monotonicity on [0, hi]
    let mut prev = 0.0;
    let mut monotone = true;
    for j in 1..=8 {
        let d = dist(hi * j as f64 / 8.0)?;
        if d + opts.tol < prev {
            monotone = false;
        }
        prev = prev.max(d);
    }

    if !monotone {
        // sup semantics: last grid shift that is still within eps
        const GRID: usize = 1024;
        let top = 4.0 * hi;
        let mut last_ok = 0usize;
        for j in 1..=GRID {
            if dist(top * j as f64 / GRID as f64)? <= eps {
                last_ok = j;
            }
        }
        lo = top * last_ok as f64 / GRID as f64;
        hi = top * (last_ok + 1) as f64 / GRID as f64;
    }

    while hi - lo > opts.tol_delta {
        let mid = 0.5 * (lo + hi);
        if dist(mid)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(lo, !monotone, evaluations))
}
