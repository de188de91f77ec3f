//! Parameter-free location estimator for symmetric log-concave mixtures.
//!
//! For a threshold `gamma` a center `m` is ruled out when some pair of mirrored
//! intervals `[m - b, m - a]`, `[m + a, m + b]` holds sample counts `L`, `R` with
//! `|sqrt(L) - sqrt(R)| > gamma`. Only tests whose heavier side holds exactly `ell`
//! samples, delimited by samples, with `ell` a power of two, are examined. For each
//! `ell` a monotonic-stack sweep finds the largest center ruled out from the left
//! and, on the reflected data, the smallest ruled out from the right, in `O(n)`.
//! The estimate is taken from the feasible interval at the smallest `gamma` on a
//! doubling grid for which the interval is non-empty.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::samples::SampleSet;
use crate::scalar::Real;

/// Doubling threshold grid `[1/sqrt(n), 2/sqrt(n), 4/sqrt(n), ..., sqrt(n + 1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaList<T> {
    gammas: Vec<T>,
}

impl<T: Real> GammaList<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

pub fn build_gamma_list<T: Real>(n: usize) -> Result<GammaList<T>> {
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    let small = T::one() / T::from_usize_lossy(n).sqrt();
    let large = T::from_usize_lossy(n + 1).sqrt();
    let two = T::one() + T::one();
    let mut gammas = vec![small];
    let mut g = two * small;
    while g < large {
        gammas.push(g);
        g = g * two;
    }
    gammas.push(large);
    Ok(GammaList { gammas })
}

/// Largest light-side count `L` for which an `ell`-heavy test still fails, i.e. the
/// largest `L` with `sqrt(ell) - sqrt(L) > gamma`; `None` when `sqrt(ell) <= gamma`.
///
/// Starts from `ceil((sqrt(ell) - gamma)^2) - 1` and steps by one where rounding makes
/// that closed form disagree with the comparison itself.
pub fn left_count_cap<T: Real>(ell: usize, gamma: T) -> Option<usize> {
    let root = T::from_usize_lossy(ell).sqrt();
    if root <= gamma {
        return None;
    }
    let fails = |l: usize| root - T::from_usize_lossy(l).sqrt() > gamma;
    let d = root - gamma;
    let mut cap = ((d * d).ceil().to_f64_lossy() as i64 - 1).clamp(0, ell as i64 - 1) as usize;
    while cap + 1 < ell && fails(cap + 1) {
        cap += 1;
    }
    while cap > 0 && !fails(cap) {
        cap -= 1;
    }
    Some(cap)
}

fn check_ell(n: usize, ell: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::Domain("ell must be at least 1".into()));
    }
    if ell > n {
        return Err(Error::Domain(format!("ell = {ell} exceeds the sample count {n}")));
    }
    Ok(())
}

/// Outcome of one sweep, with the pair of sample indices realising the bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOutcome<T> {
    pub bound: T,
    /// `(l, r)`: the light interval ends just below `x[l]`, the heavy one is `[x[r], x[r + ell - 1]]`.
    pub witness: Option<(usize, usize)>,
    /// Stack pushes plus pops.
    pub stack_ops: usize,
}

/// Reusable buffers for repeated sweeps over the same sample count.
#[derive(Debug, Default)]
struct Sweeper {
    non_dominated: Vec<bool>,
    stack: Vec<usize>,
}

impl Sweeper {
    fn run<T: Real>(&mut self, x: &[T], gamma: T, ell: usize) -> SweepOutcome<T> {
        let none = SweepOutcome {
            bound: T::neg_infinity(),
            witness: None,
            stack_ops: 0,
        };
        let Some(cap) = left_count_cap(ell, gamma) else {
            return none;
        };
        let n = x.len();
        let right_len = |i: usize| x[i + ell - 1] - x[i];
        // left windows ending just below x[i] of length < left_len(i) hold at most `cap` samples
        let left_len = |i: usize| {
            if i <= cap {
                T::infinity()
            } else {
                x[i] - x[i - cap - 1]
            }
        };

        // a right option is dominated by a later one that is no longer
        let options = n - ell + 1;
        self.non_dominated.clear();
        self.non_dominated.resize(options, false);
        let mut shortest = T::infinity();
        for i in (0..options).rev() {
            let len = right_len(i);
            if len < shortest {
                self.non_dominated[i] = true;
                shortest = len;
            }
        }

        let stack = &mut self.stack;
        stack.clear();
        let mut ops = 0;
        let mut best = none;
        for i in 0..options {
            let li = left_len(i);
            while let Some(&top) = stack.last() {
                if left_len(top) <= li {
                    stack.pop();
                    ops += 1;
                } else {
                    break;
                }
            }
            stack.push(i);
            ops += 1;
            if !self.non_dominated[i] {
                continue;
            }
            let ri = right_len(i);
            while let Some(&top) = stack.last() {
                if left_len(top) <= ri {
                    stack.pop();
                    ops += 1;
                } else {
                    break;
                }
            }
            if let Some(&top) = stack.last() {
                let candidate = T::midpoint(x[top], x[i]);
                if best.witness.is_none() || candidate > best.bound {
                    best.bound = candidate;
                    best.witness = Some((top, i));
                }
            }
        }
        best.stack_ops = ops;
        best
    }
}

/// Largest center ruled out by an `ell`-heavy test whose heavier interval lies to the
/// right, or `-inf` if there is none. `x` must be sorted.
pub fn biggest_lower_bound<T: Real>(x: &[T], gamma: T, ell: usize) -> Result<T> {
    Ok(biggest_lower_bound_traced(x, gamma, ell)?.bound)
}

/// [`biggest_lower_bound`] with its witness and operation count.
pub fn biggest_lower_bound_traced<T: Real>(x: &[T], gamma: T, ell: usize) -> Result<SweepOutcome<T>> {
    check_ell(x.len(), ell)?;
    Ok(Sweeper::default().run(x, gamma, ell))
}

fn reflect<T: Real>(x: &[T]) -> Vec<T> {
    x.iter().rev().map(|&v| -v).collect()
}

/// Smallest center ruled out by an `ell`-heavy test whose heavier interval lies to the
/// left, or `+inf`. Computed as the reflected lower bound of the reflected data.
pub fn smallest_upper_bound<T: Real>(x: &[T], gamma: T, ell: usize) -> Result<T> {
    check_ell(x.len(), ell)?;
    Ok(-Sweeper::default().run(&reflect(x), gamma, ell).bound)
}

/// Powers of two `1, 2, 4, ..., 2^floor(log2 n)`.
pub fn ell_values(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut ell = 1usize;
    while ell <= n {
        out.push(ell);
        match ell.checked_mul(2) {
            Some(next) => ell = next,
            None => break,
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Fail,
}

/// Open interval of centers that pass every examined test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibleInterval<T> {
    pub lower: T,
    pub upper: T,
    pub status: Status,
}

impl<T: Real> FeasibleInterval<T> {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }

    pub fn from_bounds(lower: T, upper: T) -> Self {
        let status = if lower <= upper { Status::Feasible } else { Status::Fail };
        Self { lower, upper, status }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllBounds<T> {
    pub ell: usize,
    pub lower: T,
    pub upper: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaCheck<T> {
    pub interval: FeasibleInterval<T>,
    pub per_ell: Vec<EllBounds<T>>,
}

struct Checker<'a, T> {
    x: &'a [T],
    reflected: Vec<T>,
    sweeper: Sweeper,
}

impl<'a, T: Real> Checker<'a, T> {
    fn new(x: &'a [T]) -> Self {
        Self {
            x,
            reflected: reflect(x),
            sweeper: Sweeper::default(),
        }
    }

    fn check(&mut self, gamma: T) -> GammaCheck<T> {
        let mut lower = T::neg_infinity();
        let mut upper = T::infinity();
        let mut per_ell = Vec::new();
        for ell in ell_values(self.x.len()) {
            let lo = self.sweeper.run(self.x, gamma, ell).bound;
            let hi = -self.sweeper.run(&self.reflected, gamma, ell).bound;
            lower = lower.max(lo);
            upper = upper.min(hi);
            per_ell.push(EllBounds {
                ell,
                lower: lo,
                upper: hi,
            });
        }
        GammaCheck {
            interval: FeasibleInterval::from_bounds(lower, upper),
            per_ell,
        }
    }
}

/// Intersects the constraints of every `ell`-heavy test, `ell` a power of two, at threshold `gamma`.
pub fn fixed_gamma_check<T: Real>(samples: &SampleSet<T>, gamma: T) -> FeasibleInterval<T> {
    Checker::new(samples.values()).check(gamma).interval
}

/// [`fixed_gamma_check`] with the per-`ell` bounds.
pub fn fixed_gamma_check_detailed<T: Real>(samples: &SampleSet<T>, gamma: T) -> GammaCheck<T> {
    Checker::new(samples.values()).check(gamma)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport<T> {
    pub n: usize,
    pub mu_hat: T,
    pub gamma_star: T,
    /// Position of `gamma_star` in the gamma list.
    pub gamma_index: usize,
    pub interval: FeasibleInterval<T>,
    pub per_ell_bounds: Vec<EllBounds<T>>,
    pub wall_time: Duration,
}

fn json_real<T: Real>(v: T) -> Value {
    let f = v.to_f64_lossy();
    if f.is_finite() {
        json!(f)
    } else if f > 0.0 {
        json!("inf")
    } else if f < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

impl<T: Real> EstimateReport<T> {
    /// JSON rendering; infinite bounds are written as the strings `"inf"` and `"-inf"`.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "mu_hat": json_real(self.mu_hat),
            "gamma_star": json_real(self.gamma_star),
            "gamma_index": self.gamma_index,
            "interval": {
                "lower": json_real(self.interval.lower),
                "upper": json_real(self.interval.upper),
                "status": match self.interval.status {
                    Status::Feasible => "feasible",
                    Status::Fail => "fail",
                },
            },
            "per_ell_bounds": self.per_ell_bounds.iter().map(|b| json!({
                "ell": b.ell,
                "lower": json_real(b.lower),
                "upper": json_real(b.upper),
            })).collect::<Vec<_>>(),
            "wall_time_ns": self.wall_time.as_nanos() as u64,
        })
    }
}

/// Point inside the feasible interval: the midpoint when both ends are finite, the
/// finite end moved inward by the sample range when one end is infinite, the sample
/// median when both are.
fn pick_center<T: Real>(interval: &FeasibleInterval<T>, samples: &SampleSet<T>) -> T {
    let (lo, hi) = (interval.lower, interval.upper);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) if lo == hi => lo,
        (true, true) => T::midpoint(lo, hi),
        (true, false) => lo + samples.range(),
        (false, true) => hi - samples.range(),
        (false, false) => samples.median(),
    }
}

/// Binary search for the smallest gamma on the grid whose feasible interval is non-empty.
pub fn estimate<T: Real>(samples: &SampleSet<T>) -> Result<EstimateReport<T>> {
    let start = Instant::now();
    let x = samples.values();
    let gammas = build_gamma_list::<T>(x.len())?;
    let gammas = gammas.as_slice();
    let mut checker = Checker::new(x);

    let (mut lo, mut hi) = (0usize, gammas.len() - 1);
    let mut at_hi: Option<GammaCheck<T>> = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let c = checker.check(gammas[mid]);
        if c.interval.is_feasible() {
            hi = mid;
            at_hi = Some(c);
        } else {
            lo = mid + 1;
        }
    }
    // the last entry is never probed; every other value of `hi` comes with its check
    let check = match at_hi {
        Some(c) => c,
        None => checker.check(gammas[lo]),
    };
    debug_assert!(check.interval.is_feasible());

    Ok(EstimateReport {
        n: x.len(),
        mu_hat: pick_center(&check.interval, samples),
        gamma_star: gammas[lo],
        gamma_index: lo,
        interval: check.interval,
        per_ell_bounds: check.per_ell,
        wall_time: start.elapsed(),
    })
}

/// Sorts `values` and runs [`estimate`].
pub fn estimate_values<T: Real>(values: Vec<T>) -> Result<EstimateReport<T>> {
    estimate(&SampleSet::from_unsorted(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> SampleSet<f64> {
        SampleSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn gamma_list_small_cases() {
        let g = build_gamma_list::<f64>(4).unwrap();
        assert_eq!(g.as_slice(), &[0.5, 1.0, 2.0, 5f64.sqrt()]);
        let g = build_gamma_list::<f64>(1).unwrap();
        assert_eq!(g.as_slice(), &[1.0, 2f64.sqrt()]);
        assert!(build_gamma_list::<f64>(0).is_err());
    }

    #[test]
    fn gamma_lists_strictly_increase() {
        for n in (1..2000).chain([65_535, 65_536, 999_999, 1_000_000]) {
            let g = build_gamma_list::<f64>(n).unwrap();
            assert!(g.as_slice().windows(2).all(|w| w[0] < w[1]), "n = {n}");
            assert_eq!(*g.as_slice().last().unwrap(), ((n + 1) as f64).sqrt());
        }
    }

    #[test]
    fn cap_examples() {
        assert_eq!(left_count_cap(16, 1.0), Some(8));
        assert_eq!(left_count_cap(4, 2.0), None);
        assert_eq!(left_count_cap(9, 0.5), Some(6));
        assert_eq!(left_count_cap(1, 0.5), Some(0));
    }

    #[test]
    fn cap_agrees_with_literal_comparison() {
        for ell in 1..300usize {
            for k in 1..400 {
                let gamma = k as f64 * 0.05;
                let root = (ell as f64).sqrt();
                let expected = (0..ell).rev().find(|&l| root - (l as f64).sqrt() > gamma);
                assert_eq!(left_count_cap(ell, gamma), expected, "ell {ell} gamma {gamma}");
            }
        }
    }

    #[test]
    fn four_point_examples() {
        let x = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(biggest_lower_bound(&x, 2f64.sqrt(), 2).unwrap(), f64::NEG_INFINITY);
        assert_eq!(biggest_lower_bound(&x, 0.1, 2).unwrap(), 2.0);
        assert_eq!(smallest_upper_bound(&x, 0.1, 2).unwrap(), 1.0);
        assert_eq!(smallest_upper_bound(&x, 2f64.sqrt(), 2).unwrap(), f64::INFINITY);
        let fi = fixed_gamma_check(&set(&x), 0.1);
        assert_eq!(fi.status, Status::Fail);
        assert!(biggest_lower_bound(&x, 0.1, 0).is_err());
        assert!(biggest_lower_bound(&x, 0.1, 5).is_err());
    }

    #[test]
    fn largest_gamma_is_always_feasible() {
        let s = set(&[0.0, 0.1, 0.3, 5.0, 5.5, 9.0, 9.0, 9.0]);
        let g = build_gamma_list::<f64>(s.len()).unwrap();
        assert!(fixed_gamma_check(&s, *g.as_slice().last().unwrap()).is_feasible());
    }

    #[test]
    fn single_sample() {
        let s = set(&[4.25]);
        for &g in build_gamma_list::<f64>(1).unwrap().as_slice() {
            let fi = fixed_gamma_check(&s, g);
            assert_eq!((fi.lower, fi.upper), (f64::NEG_INFINITY, f64::INFINITY));
        }
        assert_eq!(estimate(&s).unwrap().mu_hat, 4.25);
    }

    #[test]
    fn symmetric_three_points() {
        let r = estimate(&set(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.mu_hat, 0.0);
        assert!(r.interval.is_feasible());
    }

    #[test]
    fn works_in_single_precision() {
        let s = SampleSet::from_unsorted(vec![-1.0f32, -0.5, 0.0, 0.25, 0.5, 1.0]).unwrap();
        let r = estimate(&s).unwrap();
        assert!(r.mu_hat.abs() < 1.0);
        let r64 = estimate(&set(&[-1.0, -0.5, 0.0, 0.25, 0.5, 1.0])).unwrap();
        assert_eq!(r.gamma_index, r64.gamma_index);
    }

    #[test]
    fn report_json_encodes_infinities() {
        let r = estimate(&set(&[2.0])).unwrap();
        let v = r.to_json();
        assert_eq!(v["interval"]["lower"], "-inf");
        assert_eq!(v["interval"]["upper"], "inf");
        assert_eq!(v["mu_hat"], 2.0);
    }

    #[test]
    fn sweep_is_linear() {
        let x: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 5000) as f64).collect();
        let s = set(&x);
        for ell in ell_values(s.len()) {
            let out = biggest_lower_bound_traced(s.values(), 0.3, ell).unwrap();
            assert!(out.stack_ops <= 2 * s.len(), "ell {ell}: {}", out.stack_ops);
        }
    }
}
