//! Hard-instance constructions and numeric checks of their properties.
//!
//! The step family hides `1/(2 eps)` independent widths inside a triangle; the
//! modified triangle/step pair pushes forward onto triangle/step under [`h_map`];
//! the bucket-toggled uniform `D_v` has Hellinger distance equal to total variation
//! under translation. Each check below returns the measured slack so callers can
//! print or assert on it.

use rand::Rng;
use serde::Serialize;

use crate::distributions::{batch_count, rng_from_seed, DensityModel, DvParams, StepParams};
use crate::error::{Error, Result};
use crate::hellinger::{sq_hellinger, tv_distance};
use crate::quadrature::integrate;

/// Three-level step `s_w` on `[0, eps]` without validation.
pub(crate) fn s_w(w: f64, eps: f64, x: f64) -> f64 {
    let mid = eps / 2.0;
    if x < mid - w {
        0.0
    } else if x <= mid + w {
        mid
    } else {
        eps
    }
}

/// `s_w(x)` for `0 <= w <= eps/2` and `x` in `[0, eps]`. The middle level covers the closed
/// interval `[eps/2 - w, eps/2 + w]`, and `s_w(eps) = eps` for `w < eps/2`.
pub fn s_w_eval(w: f64, eps: f64, x: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    if !(w >= 0.0 && w <= eps / 2.0) {
        return Err(Error::Parameter(format!("w = {w} outside [0, eps/2]")));
    }
    if !(x >= 0.0 && x <= eps) {
        return Err(Error::Domain(format!("x = {x} outside [0, eps]")));
    }
    Ok(s_w(w, eps, x))
}

/// Folds `[1, 3/2)` onto `[0, 1/2)` and `(-3/2, -1]` onto `(-1/2, 0]`; identity elsewhere.
pub fn h_map(x: f64) -> f64 {
    if (1.0..1.5).contains(&x) {
        x - 1.0
    } else if x > -1.5 && x <= -1.0 {
        x + 1.0
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FIntegralResult {
    pub eps: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `int p_v p_w / p_0` with `p_0` the modified triangle and `p_v`, `p_w` modified steps.
    pub value: f64,
    pub quad_error: f64,
}

impl FIntegralResult {
    /// `g(v, w) = f(v, w) - 1`.
    pub fn g(&self) -> f64 {
        self.value - 1.0
    }
}

fn merged_breaks(models: &[&DensityModel]) -> Vec<f64> {
    let mut out: Vec<f64> = models.iter().flat_map(|m| m.breakpoints()).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `f(v, w) = int Mod-Step_v Mod-Step_w / Mod-Tri`, integrating panel by panel between
/// the breakpoints of all three densities. Where the denominator vanishes so do both
/// numerator factors and the integrand is taken as 0.
pub fn f_integral(v: &StepParams, w: &StepParams) -> Result<FIntegralResult> {
    if v.eps != w.eps {
        return Err(Error::Parameter(format!(
            "step vectors use different eps ({} and {})",
            v.eps, w.eps
        )));
    }
    let eps = v.eps;
    let p0 = DensityModel::mod_triangle(eps, 0.0)?;
    let pv = DensityModel::mod_step(v.clone(), 0.0)?;
    let pw = DensityModel::mod_step(w.clone(), 0.0)?;
    let breaks = merged_breaks(&[&p0, &pv, &pw]);
    let r = integrate(
        |x| {
            let d = p0.pdf(x);
            if d == 0.0 {
                0.0
            } else {
                pv.pdf(x) * pw.pdf(x) / d
            }
        },
        -1.5,
        1.5,
        &breaks,
        1e-12,
    )?;
    Ok(FIntegralResult {
        eps,
        v: v.v.clone(),
        w: w.v.clone(),
        value: r.value,
        quad_error: r.abs_error,
    })
}

/// Contribution of one batch to `g`, by quadrature:
/// `2 int_0^eps (1/2 + s_a(x)) (1/2 + s_b(x)) / (1/2 + x) dx - eps - eps^2`.
/// Batches are identical up to translation, so the index does not enter.
pub fn g_batch(a: f64, b: f64, eps: f64) -> Result<f64> {
    let mut breaks = vec![eps / 2.0 - a, eps / 2.0 + a, eps / 2.0 - b, eps / 2.0 + b];
    breaks.sort_by(f64::total_cmp);
    let r = integrate(
        |x| (0.5 + s_w(a, eps, x)) * (0.5 + s_w(b, eps, x)) / (0.5 + x),
        0.0,
        eps,
        &breaks,
        1e-15,
    )?;
    Ok(2.0 * r.value - eps - eps * eps)
}

fn random_step(eps: f64, rng: &mut impl Rng) -> Result<StepParams> {
    StepParams::random(eps, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FDrawSummary {
    pub eps: f64,
    pub draws: usize,
    pub min_f: f64,
    pub max_quad_error: f64,
    /// Draws with `f < 1 - 1e-9`.
    pub below_one: usize,
    pub mean_g: f64,
    pub std_error_g: f64,
}

impl FDrawSummary {
    pub fn all_at_least_one(&self) -> bool {
        self.below_one == 0
    }

    /// Mean of `g` within `z` standard errors of zero.
    pub fn mean_consistent_with_zero(&self, z: f64) -> bool {
        self.mean_g.abs() <= z * self.std_error_g
    }
}

/// `f(v, w)` over `draws` independent pairs with entries from `Unif(0, eps/2)`.
pub fn f_draws(eps: f64, draws: usize, seed: u64) -> Result<FDrawSummary> {
    if draws < 2 {
        return Err(Error::Parameter("need at least two draws".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut gs = Vec::with_capacity(draws);
    let mut min_f = f64::INFINITY;
    let mut max_quad_error: f64 = 0.0;
    for _ in 0..draws {
        let v = random_step(eps, &mut rng)?;
        let w = random_step(eps, &mut rng)?;
        let r = f_integral(&v, &w)?;
        min_f = min_f.min(r.value);
        max_quad_error = max_quad_error.max(r.quad_error);
        gs.push(r.g());
    }
    let n = gs.len() as f64;
    let mean = gs.iter().sum::<f64>() / n;
    let var = gs.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0);
    Ok(FDrawSummary {
        eps,
        draws,
        min_f,
        max_quad_error,
        below_one: gs.iter().filter(|g| **g < -1e-9).count(),
        mean_g: mean,
        std_error_g: (var / n).sqrt(),
    })
}

/// Largest `|g_i(a, b)|` over an `m x m` grid of `(a, b)` in `[0, eps/2]^2`.
pub fn max_abs_g_batch(eps: f64, m: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..=m {
        for j in 0..=m {
            let a = eps / 2.0 * i as f64 / m as f64;
            let b = eps / 2.0 * j as f64 / m as f64;
            best = best.max(g_batch(a, b, eps)?.abs());
        }
    }
    Ok(best)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    pub eps: f64,
    pub points: usize,
    /// `max |E_v Step_v(x) - Tri(x)|` over the grid.
    pub step_max_dev: f64,
    /// `max |E_v Mod-Step_v(x) - Mod-Tri(x)|` over the grid.
    pub mod_step_max_dev: f64,
}

impl MarginalReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.step_max_dev <= tol && self.mod_step_max_dev <= tol
    }
}

/// Averages `density(v)` at `x` over `v_i ~ Unif(0, eps/2)`. Only the entry of the batch
/// containing `x` matters, so this is a one-dimensional integral over that entry.
fn marginal_at(eps: f64, x: f64, make: impl Fn(StepParams) -> Result<DensityModel>) -> Result<f64> {
    let k = batch_count(eps)?;
    let a = x.abs();
    let i = ((a / eps).floor() as usize).min(k - 1);
    // s_w(t) switches branch when w crosses |t - eps/2|
    let t = (i + 1) as f64 * eps - a;
    let kink = (t - eps / 2.0).abs();
    let eval = |w: f64| -> f64 {
        let mut v = vec![0.0; k];
        v[i] = w.clamp(0.0, eps / 2.0);
        make(StepParams { eps, v }).map(|m| m.pdf(x)).unwrap_or(f64::NAN)
    };
    let r = integrate(eval, 0.0, eps / 2.0, &[kink], 1e-13)?;
    Ok(r.value / (eps / 2.0))
}

/// Checks `E_v[Step_v(x)] = Tri(x)` and `E_v[Mod-Step_v(x)] = Mod-Tri(x)` at each grid point.
pub fn verify_unbiased_marginal(eps: f64, grid: &[f64]) -> Result<MarginalReport> {
    let tri = DensityModel::triangle(0.0)?;
    let mod_tri = DensityModel::mod_triangle(eps, 0.0)?;
    let mut step_max_dev: f64 = 0.0;
    let mut mod_step_max_dev: f64 = 0.0;
    for &x in grid {
        let inner = x.abs() < 0.5;
        let step = if inner {
            marginal_at(eps, x, |p| DensityModel::step(p, 0.0))?
        } else {
            DensityModel::step(StepParams::zeros(eps)?, 0.0)?.pdf(x)
        };
        step_max_dev = step_max_dev.max((step - tri.pdf(x)).abs());
        let mod_step = if inner {
            marginal_at(eps, x, |p| DensityModel::mod_step(p, 0.0))?
        } else {
            DensityModel::mod_step(StepParams::zeros(eps)?, 0.0)?.pdf(x)
        };
        mod_step_max_dev = mod_step_max_dev.max((mod_step - mod_tri.pdf(x)).abs());
    }
    Ok(MarginalReport {
        eps,
        points: grid.len(),
        step_max_dev,
        mod_step_max_dev,
    })
}

/// `P(h(X) <= y)` from the cdf of `X`, summing the three preimage branches of `h`.
pub fn pushforward_cdf(model: &DensityModel, y: f64) -> f64 {
    let f = |x: f64| model.cdf(x);
    // identity branch on (-1, 1) and beyond +-3/2
    let mut total = 0.0;
    if y > -1.0 {
        total += f(y.min(1.0)) - f(-1.0);
    }
    total += f(y.min(-1.5));
    if y > 1.5 {
        total += f(y) - f(1.5);
    }
    // [1, 3/2) lands on [0, 1/2)
    if y >= 0.0 {
        total += f((y + 1.0).min(1.5)) - f(1.0);
    }
    // (-3/2, -1] lands on (-1/2, 0]
    if y > -0.5 {
        total += f((y - 1.0).min(-1.0)) - f(-1.5);
    }
    total.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub eps: f64,
    pub v: Vec<f64>,
    pub points: usize,
    /// `max |cdf(h(Mod-Tri)) - cdf(Tri)|`.
    pub triangle_max_dev: f64,
    /// `max |cdf(h(Mod-Step_v)) - cdf(Step_v)|`.
    pub step_max_dev: f64,
}

impl PushforwardReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.triangle_max_dev <= tol && self.step_max_dev <= tol
    }
}

/// Compares pushforward cdfs on a 512-point grid over `[-1.6, 1.6]` for a random `v`.
pub fn verify_pushforward(eps: f64, seed: u64) -> Result<PushforwardReport> {
    let mut rng = rng_from_seed(seed);
    let v = StepParams::random(eps, &mut rng)?;
    let tri = DensityModel::triangle(0.0)?;
    let mod_tri = DensityModel::mod_triangle(eps, 0.0)?;
    let step = DensityModel::step(v.clone(), 0.0)?;
    let mod_step = DensityModel::mod_step(v.clone(), 0.0)?;
    const POINTS: usize = 512;
    let mut triangle_max_dev: f64 = 0.0;
    let mut step_max_dev: f64 = 0.0;
    for j in 0..POINTS {
        let y = -1.6 + 3.2 * j as f64 / (POINTS - 1) as f64;
        triangle_max_dev = triangle_max_dev.max((pushforward_cdf(&mod_tri, y) - tri.cdf(y)).abs());
        step_max_dev = step_max_dev.max((pushforward_cdf(&mod_step, y) - step.cdf(y)).abs());
    }
    Ok(PushforwardReport {
        eps,
        v: v.v,
        points: POINTS,
        triangle_max_dev,
        step_max_dev,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepShiftCheck {
    pub delta: f64,
    pub distance: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepModulusReport {
    pub eps: f64,
    pub checks: Vec<StepShiftCheck>,
    /// Smallest `distance - lower` over the grid.
    pub min_lower_slack: f64,
    /// Smallest `upper - distance` over the grid.
    pub min_upper_slack: f64,
}

impl StepModulusReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.min_lower_slack >= -tol && self.min_upper_slack >= -tol
    }
}

/// For each shift checks `eps * min(delta, eps/2) / 16 <= d_h^2(Step_v, Step_v shifted) <= 2 delta`.
pub fn verify_step_modulus_bounds(params: &StepParams, delta_grid: &[f64]) -> Result<StepModulusReport> {
    let eps = params.eps;
    let step = DensityModel::step(params.clone(), 0.0)?;
    let mut checks = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let distance = sq_hellinger(&step, &step.shift(delta), 1e-11)?.value;
        checks.push(StepShiftCheck {
            delta,
            distance,
            lower: eps * delta.abs().min(eps / 2.0) / 16.0,
            upper: 2.0 * delta.abs(),
        });
    }
    let min_lower_slack = checks
        .iter()
        .map(|c| c.distance - c.lower)
        .fold(f64::INFINITY, f64::min);
    let min_upper_slack = checks
        .iter()
        .map(|c| c.upper - c.distance)
        .fold(f64::INFINITY, f64::min);
    Ok(StepModulusReport {
        eps,
        checks,
        min_lower_slack,
        min_upper_slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DvShiftCheck {
    pub delta: f64,
    pub hellinger: f64,
    pub tv: f64,
    pub bound: f64,
}

/// Squared Hellinger distance and total variation between `D_v` and its shift by `delta`,
/// with the `(4T + 2) delta` bound.
pub fn dv_shift_check(params: &DvParams, delta: f64) -> Result<DvShiftCheck> {
    let d = DensityModel::dv_uniform(params.clone(), 0.0)?;
    let s = d.shift(delta);
    Ok(DvShiftCheck {
        delta,
        hellinger: sq_hellinger(&d, &s, 1e-12)?.value,
        tv: tv_distance(&d, &s, 1e-12)?.value,
        bound: (4 * params.t + 2) as f64 * delta.abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DvReport {
    pub t: usize,
    pub v: Vec<u8>,
    /// `max |d_h^2 - TV|` over all shifts examined.
    pub hellinger_tv_max_dev: f64,
    /// Smallest `(4T + 2) delta - d_h^2` over shifts `delta <= 1/(2T)`.
    pub bound_min_slack: f64,
    /// Largest distance of the TV at the midpoint of `[m/T, (m+1)/T]` from the chord.
    pub interpolation_max_dev: f64,
    /// Same, for the half-length cells `[m/(2T), (m+1)/(2T)]`.
    pub half_cell_interpolation_max_dev: f64,
}

fn chord_deviation(params: &DvParams, lo: f64, hi: f64) -> Result<f64> {
    let a = dv_shift_check(params, lo)?.tv;
    let b = dv_shift_check(params, hi)?.tv;
    let m = dv_shift_check(params, 0.5 * (lo + hi))?.tv;
    Ok((m - 0.5 * (a + b)).abs())
}

/// Distance identity, shift bound and linear interpolation of the TV for `D_v`.
pub fn verify_dv(params: &DvParams) -> Result<DvReport> {
    params.validate()?;
    let t = params.t as f64;
    let mut hellinger_tv_max_dev: f64 = 0.0;
    let mut bound_min_slack = f64::INFINITY;
    for j in 1..=16 {
        let delta = j as f64 / (32.0 * t);
        let c = dv_shift_check(params, delta)?;
        hellinger_tv_max_dev = hellinger_tv_max_dev.max((c.hellinger - c.tv).abs());
        bound_min_slack = bound_min_slack.min(c.bound - c.hellinger);
    }
    for j in 1..=(2 * params.t) {
        let c = dv_shift_check(params, j as f64 / t + 0.37 / t)?;
        hellinger_tv_max_dev = hellinger_tv_max_dev.max((c.hellinger - c.tv).abs());
    }
    let mut interpolation_max_dev: f64 = 0.0;
    for m in 0..(2 * params.t) {
        interpolation_max_dev = interpolation_max_dev.max(chord_deviation(params, m as f64 / t, (m + 1) as f64 / t)?);
    }
    let mut half_cell_interpolation_max_dev: f64 = 0.0;
    for m in 0..(4 * params.t) {
        half_cell_interpolation_max_dev = half_cell_interpolation_max_dev.max(chord_deviation(
            params,
            m as f64 / (2.0 * t),
            (m + 1) as f64 / (2.0 * t),
        )?);
    }
    Ok(DvReport {
        t: params.t,
        v: params.v.clone(),
        hellinger_tv_max_dev,
        bound_min_slack,
        interpolation_max_dev,
        half_cell_interpolation_max_dev,
    })
}
