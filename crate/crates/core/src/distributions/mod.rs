//! Evaluatable and sampleable univariate density models.
//!
//! Every model has a closed-form pdf and cdf. Piecewise families (uniform,
//! triangle, step, modified triangle/step, bucket-toggled uniform) keep an exact
//! piecewise-linear representation used for the cdf, quantile and breakpoints;
//! their pdf is evaluated straight from the case definitions, so the two paths
//! check each other.
//!
//! Models are described in JSON with a `kind` tag, for example
//! `{"kind":"gaussian","mu":0.0,"sigma":1.0}` or
//! `{"kind":"step","params":{"eps":0.25,"v":[0.0,0.1]},"center":0.0}`.

mod normal;
mod piecewise;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::s_w;
use crate::samples::{Provenance, SampleSet};

use piecewise::Piecewise;

/// Seeded generator used for every experiment; one stream per seed.
pub type ExperimentRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Step widths for the step family: `eps` with `1/(2 eps)` a positive integer and
/// one width `v_i` in `[0, eps/2]` per batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub eps: f64,
    pub v: Vec<f64>,
}

impl StepParams {
    pub fn new(eps: f64, v: Vec<f64>) -> Result<Self> {
        let p = Self { eps, v };
        p.validate()?;
        Ok(p)
    }

    /// All widths zero.
    pub fn zeros(eps: f64) -> Result<Self> {
        let k = batch_count(eps)?;
        Self::new(eps, vec![0.0; k])
    }

    /// Widths drawn i.i.d. from `Unif(0, eps/2)`.
    pub fn random<R: Rng + ?Sized>(eps: f64, rng: &mut R) -> Result<Self> {
        let k = batch_count(eps)?;
        let v = (0..k).map(|_| rng.random::<f64>() * eps / 2.0).collect();
        Self::new(eps, v)
    }

    /// Number of batches `1/(2 eps)`.
    pub fn batches(&self) -> usize {
        self.v.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = batch_count(self.eps)?;
        if self.v.len() != k {
            return Err(Error::Parameter(format!(
                "step vector has length {}, expected 1/(2 eps) = {k}",
                self.v.len()
            )));
        }
        if let Some((i, w)) = self
            .v
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0 && **w <= self.eps / 2.0))
        {
            return Err(Error::Parameter(format!("step width v[{i}] = {w} outside [0, eps/2]")));
        }
        Ok(())
    }
}

/// Number of batches `1/(2 eps)`, failing unless it is a positive integer.
pub fn batch_count(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Parameter(format!("eps = {eps} outside (0, 1/2]")));
    }
    let k = (0.5 / eps).round();
    if (k * 2.0 * eps - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("1/(2 eps) = {} is not an integer", 0.5 / eps)));
    }
    Ok(k as usize)
}

/// Bit vector for the bucket-toggled uniform: `T` batches, each bit chooses which
/// half of the batch carries density one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvParams {
    pub t: usize,
    pub v: Vec<u8>,
}

impl DvParams {
    pub fn new(t: usize, v: Vec<u8>) -> Result<Self> {
        let p = Self { t, v };
        p.validate()?;
        Ok(p)
    }

    pub fn random<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Result<Self> {
        Self::new(t, (0..t).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::Parameter("T must be positive".into()));
        }
        if self.v.len() != self.t {
            return Err(Error::Parameter(format!(
                "bit vector has length {}, expected T = {}",
                self.v.len(),
                self.t
            )));
        }
        if self.v.iter().any(|&b| b > 1) {
            return Err(Error::Parameter("bit vector entries must be 0 or 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleComponent {
    pub weight: f64,
    pub sigma: f64,
}

/// The density families. Parameters are plain reals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Uniform {
        center: f64,
        half_width: f64,
    },
    Semicircle {
        center: f64,
        radius: f64,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<DensityModel>,
    },
    UniformGaussConvolution {
        center: f64,
        half_width: f64,
        sigma: f64,
    },
    GaussianScaleMixture {
        mu: f64,
        scales: Vec<ScaleComponent>,
    },
    Triangle {
        center: f64,
    },
    Step {
        params: StepParams,
        center: f64,
    },
    ModTriangle {
        eps: f64,
        center: f64,
    },
    ModStep {
        params: StepParams,
        center: f64,
    },
    DvUniform {
        params: DvParams,
        center: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    #[serde(flatten)]
    family: Family,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    shifts: Vec<f64>,
}

/// A validated density model, possibly translated.
///
/// `shift` records translations instead of folding them into the family's
/// center, so `shift(m, mu).pdf(x)` evaluates exactly `m.pdf(x - mu)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct DensityModel {
    family: Family,
    shifts: Vec<f64>,
    pieces: Option<Arc<Piecewise>>,
}

impl PartialEq for DensityModel {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.shifts == other.shifts
    }
}

impl TryFrom<ModelRepr> for DensityModel {
    type Error = Error;

    fn try_from(repr: ModelRepr) -> Result<Self> {
        if let Some(s) = repr.shifts.iter().find(|s| !s.is_finite()) {
            return Err(Error::Parameter(format!("shift {s} is not finite")));
        }
        let mut model = DensityModel::new(repr.family)?;
        model.shifts = repr.shifts;
        Ok(model)
    }
}

impl From<DensityModel> for ModelRepr {
    fn from(m: DensityModel) -> Self {
        ModelRepr {
            family: m.family,
            shifts: m.shifts,
        }
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {x} is not finite")))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {x} must be positive and finite")))
    }
}

fn normalized_weights(weights: &[f64], len: usize) -> Result<Vec<f64>> {
    if weights.len() != len || len == 0 {
        return Err(Error::Parameter(format!(
            "mixture needs one weight per component ({} weights, {len} components)",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Parameter("mixture weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Parameter("mixture weights sum to zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

impl DensityModel {
    /// Validates the parameters; mixture weights are normalised to sum to one.
    pub fn new(family: Family) -> Result<Self> {
        let family = match family {
            Family::Gaussian { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
                Family::Gaussian { mu, sigma }
            }
            Family::Uniform { center, half_width } => {
                finite("center", center)?;
                positive("half_width", half_width)?;
                Family::Uniform { center, half_width }
            }
            Family::Semicircle { center, radius } => {
                finite("center", center)?;
                positive("radius", radius)?;
                Family::Semicircle { center, radius }
            }
            Family::Mixture { weights, components } => {
                let weights = normalized_weights(&weights, components.len())?;
                Family::Mixture { weights, components }
            }
            Family::UniformGaussConvolution {
                center,
                half_width,
                sigma,
            } => {
                finite("center", center)?;
                positive("half_width", half_width)?;
                positive("sigma", sigma)?;
                Family::UniformGaussConvolution {
                    center,
                    half_width,
                    sigma,
                }
            }
            Family::GaussianScaleMixture { mu, scales } => {
                finite("mu", mu)?;
                for s in &scales {
                    positive("sigma", s.sigma)?;
                }
                let raw: Vec<f64> = scales.iter().map(|s| s.weight).collect();
                let weights = normalized_weights(&raw, scales.len())?;
                let scales = scales
                    .iter()
                    .zip(weights)
                    .map(|(s, weight)| ScaleComponent { weight, sigma: s.sigma })
                    .collect();
                Family::GaussianScaleMixture { mu, scales }
            }
            Family::Triangle { center } => {
                finite("center", center)?;
                Family::Triangle { center }
            }
            Family::Step { params, center } => {
                finite("center", center)?;
                params.validate()?;
                Family::Step { params, center }
            }
            Family::ModTriangle { eps, center } => {
                finite("center", center)?;
                batch_count(eps)?;
                Family::ModTriangle { eps, center }
            }
            Family::ModStep { params, center } => {
                finite("center", center)?;
                params.validate()?;
                Family::ModStep { params, center }
            }
            Family::DvUniform { params, center } => {
                finite("center", center)?;
                params.validate()?;
                Family::DvUniform { params, center }
            }
        };
        let pieces = build_pieces(&family).map(Arc::new);
        Ok(Self {
            family,
            shifts: Vec::new(),
            pieces,
        })
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Gaussian { mu, sigma })
    }

    pub fn uniform(center: f64, half_width: f64) -> Result<Self> {
        Self::new(Family::Uniform { center, half_width })
    }

    pub fn semicircle(center: f64, radius: f64) -> Result<Self> {
        Self::new(Family::Semicircle { center, radius })
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<DensityModel>) -> Result<Self> {
        Self::new(Family::Mixture { weights, components })
    }

    pub fn uniform_gauss_convolution(center: f64, half_width: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::UniformGaussConvolution {
            center,
            half_width,
            sigma,
        })
    }

    pub fn gaussian_scale_mixture(mu: f64, scales: &[(f64, f64)]) -> Result<Self> {
        Self::new(Family::GaussianScaleMixture {
            mu,
            scales: scales
                .iter()
                .map(|&(weight, sigma)| ScaleComponent { weight, sigma })
                .collect(),
        })
    }

    pub fn triangle(center: f64) -> Result<Self> {
        Self::new(Family::Triangle { center })
    }

    pub fn step(params: StepParams, center: f64) -> Result<Self> {
        Self::new(Family::Step { params, center })
    }

    pub fn mod_triangle(eps: f64, center: f64) -> Result<Self> {
        Self::new(Family::ModTriangle { eps, center })
    }

    pub fn mod_step(params: StepParams, center: f64) -> Result<Self> {
        Self::new(Family::ModStep { params, center })
    }

    pub fn dv_uniform(params: DvParams, center: f64) -> Result<Self> {
        Self::new(Family::DvUniform { params, center })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Translations applied on top of the family, in application order.
    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    fn unshift(&self, x: f64) -> f64 {
        self.shifts.iter().rev().fold(x, |y, s| y - s)
    }

    fn reshift(&self, y: f64) -> f64 {
        self.shifts.iter().fold(y, |x, s| x + s)
    }

    /// Translated copy: `shift(mu).pdf(x) == pdf(x - mu)`.
    pub fn shift(&self, mu: f64) -> Self {
        let mut out = self.clone();
        if mu != 0.0 {
            out.shifts.push(mu);
        }
        out
    }

    pub fn pdf(&self, x: f64) -> f64 {
        family_pdf(&self.family, self.unshift(x))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let y = self.unshift(x);
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let z = (y - mu) / sigma;
                -0.5 * z * z - sigma.ln() - normal::LN_SQRT_2PI
            }
            Family::GaussianScaleMixture { mu, scales } => log_sum_exp(scales.iter().map(|s| {
                let z = (y - mu) / s.sigma;
                s.weight.ln() - 0.5 * z * z - s.sigma.ln() - normal::LN_SQRT_2PI
            })),
            Family::Mixture { weights, components } => {
                log_sum_exp(weights.iter().zip(components).map(|(w, c)| w.ln() + c.ln_pdf(y)))
            }
            family => family_pdf(family, y).ln(),
        }
    }

    /// `sum of ln_pdf(x - theta)` over `xs`, summed in order. Matches the per-point
    /// sum bit for bit; the family dispatch is hoisted out of the loop and the scan stops
    /// at the first zero density.
    pub fn ln_likelihood(&self, xs: &[f64], theta: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mu, sigma } => {
                let ln_sigma = sigma.ln();
                xs.iter()
                    .map(|&x| {
                        let z = (self.unshift(x - theta) - mu) / sigma;
                        -0.5 * z * z - ln_sigma - normal::LN_SQRT_2PI
                    })
                    .sum()
            }
            Family::Uniform { center, half_width } => {
                let inside = (0.5 / half_width).ln();
                let mut total = 0.0;
                for &x in xs {
                    if (self.unshift(x - theta) - center).abs() > *half_width {
                        return f64::NEG_INFINITY;
                    }
                    total += inside;
                }
                total
            }
            _ => {
                let mut total = 0.0;
                for &x in xs {
                    total += self.ln_pdf(x - theta);
                    if total == f64::NEG_INFINITY {
                        return total;
                    }
                }
                total
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let y = self.unshift(x);
        if let Some(p) = &self.pieces {
            return p.cdf(y);
        }
        let v = match &self.family {
            Family::Gaussian { mu, sigma } => normal::cdf((y - mu) / sigma),
            Family::Semicircle { center, radius } => {
                let z = ((y - center) / radius).clamp(-1.0, 1.0);
                0.5 + (z * (1.0 - z * z).sqrt() + z.asin()) / PI
            }
            Family::Mixture { weights, components } => weights.iter().zip(components).map(|(w, c)| w * c.cdf(y)).sum(),
            Family::UniformGaussConvolution {
                center,
                half_width,
                sigma,
            } => {
                let t = y - center;
                if t > 0.0 {
                    // 1 - F(t) by symmetry, avoids cancellation in the right tail
                    let s = -t;
                    1.0 - (normal::integrated_cdf(s + half_width, *sigma)
                        - normal::integrated_cdf(s - half_width, *sigma))
                        / (2.0 * half_width)
                } else {
                    (normal::integrated_cdf(t + half_width, *sigma) - normal::integrated_cdf(t - half_width, *sigma))
                        / (2.0 * half_width)
                }
            }
            Family::GaussianScaleMixture { mu, scales } => {
                scales.iter().map(|s| s.weight * normal::cdf((y - mu) / s.sigma)).sum()
            }
            _ => unreachable!("piecewise families handled above"),
        };
        v.clamp(0.0, 1.0)
    }

    /// Inverse cdf: exact for piecewise families, bisection otherwise.
    pub fn quantile(&self, u: f64) -> f64 {
        if let Some(p) = &self.pieces {
            return self.reshift(p.quantile(u));
        }
        let (mut lo, mut hi) = self.support(1e-300);
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Interval outside of which each tail has mass at most `tail`; the exact support
    /// for bounded families.
    pub fn support(&self, tail: f64) -> (f64, f64) {
        let (lo, hi) = family_support(&self.family, self.pieces.as_deref(), tail);
        (self.reshift(lo), self.reshift(hi))
    }

    /// `Some` exact support when it is bounded.
    pub fn bounded_support(&self) -> Option<(f64, f64)> {
        if self.is_bounded() {
            Some(self.support(0.0))
        } else {
            None
        }
    }

    pub fn is_bounded(&self) -> bool {
        match &self.family {
            Family::Gaussian { .. } | Family::UniformGaussConvolution { .. } | Family::GaussianScaleMixture { .. } => {
                false
            }
            Family::Mixture { components, .. } => components.iter().all(DensityModel::is_bounded),
            _ => true,
        }
    }

    /// Points where the pdf or its derivative may be discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut raw = match (&self.pieces, &self.family) {
            (Some(p), _) => p.breakpoints(),
            (None, Family::Semicircle { center, radius }) => vec![center - radius, *center, center + radius],
            (None, Family::Mixture { components, .. }) => {
                components.iter().flat_map(DensityModel::breakpoints).collect()
            }
            (None, Family::Gaussian { mu, .. }) | (None, Family::GaussianScaleMixture { mu, .. }) => vec![*mu],
            (None, Family::UniformGaussConvolution { center, half_width, .. }) => {
                vec![center - half_width, *center, center + half_width]
            }
            _ => Vec::new(),
        };
        for b in &mut raw {
            *b = self.reshift(*b);
        }
        raw.sort_by(f64::total_cmp);
        raw.dedup();
        raw
    }

    /// Breakpoints plus the `tail`-truncated support ends of every component, for use
    /// as forced quadrature panel boundaries.
    pub fn quadrature_breaks(&self, tail: f64) -> Vec<f64> {
        let mut out = self.breakpoints();
        let (lo, hi) = self.support(tail);
        out.push(lo);
        out.push(hi);
        let z = if tail > 0.0 && tail < 0.5 {
            normal::upper_quantile(tail)
        } else {
            40.0
        };
        match &self.family {
            Family::Mixture { components, .. } => {
                for c in components {
                    out.extend(c.quadrature_breaks(tail).into_iter().map(|b| self.reshift(b)));
                }
            }
            Family::GaussianScaleMixture { mu, scales } => {
                for s in scales {
                    out.push(self.reshift(mu - z * s.sigma));
                    out.push(self.reshift(mu + z * s.sigma));
                }
            }
            _ => {}
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Location of the mode.
    pub fn mode(&self) -> f64 {
        let m = match &self.family {
            Family::Gaussian { mu, .. } | Family::GaussianScaleMixture { mu, .. } => *mu,
            Family::Uniform { center, .. }
            | Family::Semicircle { center, .. }
            | Family::UniformGaussConvolution { center, .. }
            | Family::Triangle { center }
            | Family::Step { center, .. }
            | Family::ModTriangle { center, .. }
            | Family::ModStep { center, .. }
            | Family::DvUniform { center, .. } => *center,
            Family::Mixture { components, .. } => {
                let modes: Vec<f64> = components.iter().map(DensityModel::mode).collect();
                // highest-density component mode; exact when the modes coincide
                modes
                    .iter()
                    .copied()
                    .max_by(|a, b| family_pdf(&self.family, *a).total_cmp(&family_pdf(&self.family, *b)))
                    .expect("non-empty mixture")
            }
        };
        self.reshift(m)
    }

    /// Whether the density is symmetric about its mode.
    pub fn is_symmetric(&self) -> bool {
        match &self.family {
            Family::Mixture { components, .. } => {
                let c = components[0].mode();
                components.iter().all(|m| m.is_symmetric() && m.mode() == c)
            }
            _ => true,
        }
    }

    /// One draw.
    pub fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let y = match (&self.pieces, &self.family) {
            (Some(p), _) => p.quantile(rng.random::<f64>()),
            (None, Family::Gaussian { mu, sigma }) => mu + sigma * rng.sample::<f64, _>(StandardNormal),
            (None, Family::Semicircle { center, radius }) => {
                // x-coordinate of a uniform point in the disk
                let r = radius * rng.random::<f64>().sqrt();
                center + r * (2.0 * PI * rng.random::<f64>()).cos()
            }
            (None, Family::Mixture { weights, components }) => {
                let i = pick(weights.iter().copied(), rng);
                components[i].draw_one(rng)
            }
            (
                None,
                Family::UniformGaussConvolution {
                    center,
                    half_width,
                    sigma,
                },
            ) => {
                let u = half_width * (2.0 * rng.random::<f64>() - 1.0);
                center + u + sigma * rng.sample::<f64, _>(StandardNormal)
            }
            (None, Family::GaussianScaleMixture { mu, scales }) => {
                let i = pick(scales.iter().map(|s| s.weight), rng);
                mu + scales[i].sigma * rng.sample::<f64, _>(StandardNormal)
            }
            _ => unreachable!("piecewise families have pieces"),
        };
        self.reshift(y)
    }

    /// `n` draws in generation order.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw_one(rng)).collect()
    }

    /// `n` draws from the stream seeded with `seed`, sorted, with provenance attached.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet<f64>> {
        if n == 0 {
            return Err(Error::EmptySamples);
        }
        let mut rng = rng_from_seed(seed);
        let values = self.draw(n, &mut rng);
        Ok(SampleSet::from_unsorted(values)?.with_provenance(Provenance {
            seed,
            model: self.clone(),
        }))
    }

    /// Un-normalised mass of the piecewise representation, if any.
    pub fn piecewise_mass(&self) -> Option<f64> {
        self.pieces.as_ref().map(|p| p.total_mass())
    }
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Index of the half-open batch `[i eps, (i+1) eps)` containing `a >= 0`.
fn batch_index(a: f64, eps: f64, count: usize) -> usize {
    let mut i = (a / eps).floor() as usize;
    if i > 0 && a < i as f64 * eps {
        i -= 1;
    } else if a >= (i + 1) as f64 * eps {
        i += 1;
    }
    i.min(count - 1)
}

fn step_inner(params: &StepParams, a: f64, base: f64) -> f64 {
    let k = params.batches();
    let i = batch_index(a, params.eps, k);
    let t = (i + 1) as f64 * params.eps - a;
    base + s_w(params.v[i], params.eps, t.clamp(0.0, params.eps))
}

fn mod_outer(eps: f64, a: f64) -> f64 {
    // |x| in [1 + i eps, 1 + (i+1) eps)
    let k = batch_count(eps).expect("validated");
    let i = batch_index(a - 1.0, eps, k);
    0.5 - (i + 1) as f64 * eps
}

fn family_pdf(family: &Family, y: f64) -> f64 {
    match family {
        Family::Gaussian { mu, sigma } => normal::pdf((y - mu) / sigma) / sigma,
        Family::Uniform { center, half_width } => {
            if (y - center).abs() <= *half_width {
                0.5 / half_width
            } else {
                0.0
            }
        }
        Family::Semicircle { center, radius } => {
            let z = (y - center) / radius;
            if z.abs() < 1.0 {
                2.0 / (PI * radius) * (1.0 - z * z).sqrt()
            } else {
                0.0
            }
        }
        Family::Mixture { weights, components } => weights.iter().zip(components).map(|(w, c)| w * c.pdf(y)).sum(),
        Family::UniformGaussConvolution {
            center,
            half_width,
            sigma,
        } => {
            // (Phi((t+w)/s) - Phi((t-w)/s)) / 2w, written with upper tails for t > 0
            let t = (y - center).abs();
            (normal::sf((t - half_width) / sigma) - normal::sf((t + half_width) / sigma)) / (2.0 * half_width)
        }
        Family::GaussianScaleMixture { mu, scales } => scales
            .iter()
            .map(|s| s.weight * normal::pdf((y - mu) / s.sigma) / s.sigma)
            .sum(),
        Family::Triangle { center } => {
            let a = (y - center).abs();
            if a <= 1.0 {
                1.0 - a
            } else {
                0.0
            }
        }
        Family::Step { params, center } => {
            let a = (y - center).abs();
            if a >= 1.0 {
                0.0
            } else if a >= 0.5 {
                1.0 - a
            } else {
                let i = batch_index(a, params.eps, params.batches());
                step_inner(params, a, 1.0 - (i + 1) as f64 * params.eps)
            }
        }
        Family::ModTriangle { eps, center } => {
            let a = (y - center).abs();
            if a < 0.5 {
                let k = batch_count(*eps).expect("validated");
                let i = batch_index(a, *eps, k);
                0.5 + (i + 1) as f64 * eps - a
            } else if a < 1.0 {
                1.0 - a
            } else if a < 1.5 {
                mod_outer(*eps, a)
            } else {
                0.0
            }
        }
        Family::ModStep { params, center } => {
            let a = (y - center).abs();
            if a < 0.5 {
                step_inner(params, a, 0.5)
            } else if a < 1.0 {
                1.0 - a
            } else if a < 1.5 {
                mod_outer(params.eps, a)
            } else {
                0.0
            }
        }
        Family::DvUniform { params, center } => {
            let a = (y - center).abs();
            if a >= 1.0 {
                return 0.0;
            }
            let t = params.t as f64;
            let i = batch_index(a, 1.0 / t, params.t);
            let bit = params.v[i] as f64;
            if a < (2 * i + 1) as f64 / (2.0 * t) {
                bit
            } else {
                1.0 - bit
            }
        }
    }
}

/// Half-line pieces `(lo, hi, alpha, beta)` of a step-shaped inner region `[0, 1/2)`.
fn step_half_pieces(params: &StepParams, offset: impl Fn(usize) -> f64) -> Vec<(f64, f64, f64, f64)> {
    let eps = params.eps;
    let mut half = Vec::with_capacity(3 * params.batches());
    for (i, &w) in params.v.iter().enumerate() {
        let lo = i as f64 * eps;
        let base = offset(i);
        let m1 = lo + eps / 2.0 - w;
        let m2 = lo + eps / 2.0 + w;
        let hi = (i + 1) as f64 * eps;
        half.push((lo, m1, base + eps, 0.0));
        half.push((m1, m2, base + eps / 2.0, 0.0));
        half.push((m2, hi, base, 0.0));
    }
    half
}

fn mod_outer_pieces(eps: f64, k: usize) -> Vec<(f64, f64, f64, f64)> {
    (0..k)
        .map(|i| {
            (
                1.0 + i as f64 * eps,
                1.0 + (i + 1) as f64 * eps,
                0.5 - (i + 1) as f64 * eps,
                0.0,
            )
        })
        .collect()
}

fn build_pieces(family: &Family) -> Option<Piecewise> {
    let half: Vec<(f64, f64, f64, f64)>;
    let center;
    match family {
        Family::Uniform { center: c, half_width } => {
            center = *c;
            half = vec![(0.0, *half_width, 0.5 / half_width, 0.0)];
        }
        Family::Triangle { center: c } => {
            center = *c;
            half = vec![(0.0, 1.0, 1.0, -1.0)];
        }
        Family::Step { params, center: c } => {
            center = *c;
            let eps = params.eps;
            let mut h = step_half_pieces(params, |i| 1.0 - (i + 1) as f64 * eps);
            h.push((0.5, 1.0, 1.0, -1.0));
            half = h;
        }
        Family::ModTriangle { eps, center: c } => {
            center = *c;
            let k = batch_count(*eps).ok()?;
            let mut h: Vec<_> = (0..k)
                .map(|i| (i as f64 * eps, (i + 1) as f64 * eps, 0.5 + (i + 1) as f64 * eps, -1.0))
                .collect();
            h.push((0.5, 1.0, 1.0, -1.0));
            h.extend(mod_outer_pieces(*eps, k));
            half = h;
        }
        Family::ModStep { params, center: c } => {
            center = *c;
            let mut h = step_half_pieces(params, |_| 0.5);
            h.push((0.5, 1.0, 1.0, -1.0));
            h.extend(mod_outer_pieces(params.eps, params.batches()));
            half = h;
        }
        Family::DvUniform { params, center: c } => {
            center = *c;
            let t = params.t as f64;
            half = params
                .v
                .iter()
                .enumerate()
                .flat_map(|(i, &b)| {
                    let lo = i as f64 / t;
                    let mid = (2 * i + 1) as f64 / (2.0 * t);
                    let hi = (i + 1) as f64 / t;
                    [(lo, mid, b as f64, 0.0), (mid, hi, 1.0 - b as f64, 0.0)]
                })
                .collect();
        }
        _ => return None,
    }
    Some(Piecewise::symmetric(&half, center))
}

fn family_support(family: &Family, pieces: Option<&Piecewise>, tail: f64) -> (f64, f64) {
    if let Some(p) = pieces {
        return p.support();
    }
    let z = if tail > 0.0 && tail < 0.5 {
        normal::upper_quantile(tail)
    } else {
        40.0
    };
    match family {
        Family::Gaussian { mu, sigma } => (mu - sigma * z, mu + sigma * z),
        Family::Semicircle { center, radius } => (center - radius, center + radius),
        Family::Mixture { components, .. } => components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, c| {
            let (lo, hi) = c.support(tail);
            (acc.0.min(lo), acc.1.max(hi))
        }),
        Family::UniformGaussConvolution {
            center,
            half_width,
            sigma,
        } => (center - half_width - sigma * z, center + half_width + sigma * z),
        Family::GaussianScaleMixture { mu, scales } => {
            let s = scales.iter().map(|s| s.sigma).fold(0.0, f64::max);
            (mu - s * z, mu + s * z)
        }
        _ => unreachable!("piecewise families handled above"),
    }
}

/// The six default benchmark families: Gaussian, uniform, semicircle, Gaussian+uniform
/// mixture, uniform-Gaussian convolution and a two-scale Gaussian mixture, all centered at 0.
pub fn default_families() -> Vec<(String, DensityModel)> {
    let gaussian = DensityModel::gaussian(0.0, 1.0).expect("valid");
    let uniform = DensityModel::uniform(0.0, 1.0).expect("valid");
    vec![
        ("gaussian".into(), gaussian.clone()),
        ("uniform".into(), uniform.clone()),
        ("semicircle".into(), DensityModel::semicircle(0.0, 1.0).expect("valid")),
        (
            "gauss_uniform_mixture".into(),
            DensityModel::mixture(vec![0.5, 0.5], vec![gaussian, uniform]).expect("valid"),
        ),
        (
            "uniform_gauss_convolution".into(),
            DensityModel::uniform_gauss_convolution(0.0, 1.0, 0.05).expect("valid"),
        ),
        (
            "gaussian_scale_mixture".into(),
            DensityModel::gaussian_scale_mixture(0.0, &[(0.5, 1.0), (0.5, 0.05)]).expect("valid"),
        ),
    ]
}

#[cfg(test)]
mod tests;
