//! Slow reference implementations used to check the sweep-line estimator.
//!
//! These follow the definitions directly: every pair of interval endpoints is
//! tried and counts are taken by scanning, so they run in quadratic time.

use crate::error::{Error, Result};
use crate::fast_estimator::{ell_values, FeasibleInterval};
use crate::samples::SampleSet;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// One evaluation of the mirrored-interval test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalTest<T> {
    pub center: T,
    pub a: T,
    pub b: T,
    pub gamma: T,
    /// Samples in `[center - b, center - a]`.
    pub left: usize,
    /// Samples in `[center + a, center + b]`.
    pub right: usize,
    pub verdict: Verdict,
}

fn count_closed<T: Real>(x: &[T], lo: T, hi: T) -> usize {
    let start = x.partition_point(|&v| v < lo);
    let end = x.partition_point(|&v| v <= hi);
    end.saturating_sub(start)
}

/// Counts both closed intervals and fails when `|sqrt(L) - sqrt(R)| > gamma`.
pub fn interval_test<T: Real>(samples: &SampleSet<T>, center: T, a: T, b: T, gamma: T) -> Result<IntervalTest<T>> {
    if !(a >= T::zero() && a < b) {
        return Err(Error::Domain(format!(
            "interval test needs 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    if !(gamma >= T::zero()) {
        return Err(Error::Domain(format!("gamma = {gamma} must be non-negative")));
    }
    let x = samples.values();
    let left = count_closed(x, center - b, center - a);
    let right = count_closed(x, center + a, center + b);
    let stat = (T::from_usize_lossy(left).sqrt() - T::from_usize_lossy(right).sqrt()).abs();
    Ok(IntervalTest {
        center,
        a,
        b,
        gamma,
        left,
        right,
        verdict: if stat > gamma { Verdict::Fail } else { Verdict::Pass },
    })
}

/// Brute-force counterpart of the sweep: for every heavy interval `[x[r], x[r + ell - 1]]`
/// and every `l <= r`, counts samples at positions `j < l` with `x[j] >= x[l] - len` and
/// records `(x[l] + x[r]) / 2` when `sqrt(ell) - sqrt(count) > gamma`. Returns the maximum.
pub fn enumerate_heavy_lower_bound<T: Real>(x: &[T], gamma: T, ell: usize) -> Result<T> {
    let n = x.len();
    if ell == 0 || ell > n {
        return Err(Error::Domain(format!("ell = {ell} outside [1, {n}]")));
    }
    let root = T::from_usize_lossy(ell).sqrt();
    let mut best = T::neg_infinity();
    let mut found = false;
    for r in 0..=(n - ell) {
        let len = x[r + ell - 1] - x[r];
        let mut first = 0usize;
        for l in 0..=r {
            let edge = x[l] - len;
            while first < l && x[first] < edge {
                first += 1;
            }
            let count = l.saturating_sub(first);
            if root - T::from_usize_lossy(count).sqrt() > gamma {
                let c = T::midpoint(x[l], x[r]);
                if !found || c > best {
                    best = c;
                    found = true;
                }
            }
        }
    }
    Ok(best)
}

/// Mirror of [`enumerate_heavy_lower_bound`]: heavy interval on the left.
pub fn enumerate_heavy_upper_bound<T: Real>(x: &[T], gamma: T, ell: usize) -> Result<T> {
    let reflected: Vec<T> = x.iter().rev().map(|&v| -v).collect();
    Ok(-enumerate_heavy_lower_bound(&reflected, gamma, ell)?)
}

/// Feasible interval from the brute-force bounds over `ell` in powers of two.
pub fn naive_feasible_scan<T: Real>(samples: &SampleSet<T>, gamma: T) -> FeasibleInterval<T> {
    let x = samples.values();
    let mut lower = T::neg_infinity();
    let mut upper = T::infinity();
    for ell in ell_values(x.len()) {
        lower = lower.max(enumerate_heavy_lower_bound(x, gamma, ell).expect("ell within range"));
        upper = upper.min(enumerate_heavy_upper_bound(x, gamma, ell).expect("ell within range"));
    }
    FeasibleInterval::from_bounds(lower, upper)
}

/// Splits the index range `[lo, hi]` holding `N` samples into two ranges of exactly
/// `2^floor(log2 N)` samples, one starting at `lo` and one ending at `hi`. Together they
/// cover the whole range.
pub fn power_of_two_cover(lo: usize, hi: usize) -> ((usize, usize), (usize, usize)) {
    assert!(lo <= hi, "empty range");
    let count = hi - lo + 1;
    let p = 1usize << (usize::BITS - 1 - count.leading_zeros());
    ((lo, lo + p - 1), (hi + 1 - p, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> SampleSet<f64> {
        SampleSet::from_unsorted(v.to_vec()).unwrap()
    }

    #[test]
    fn interval_test_counts_and_threshold() {
        // 4 samples on the left, 9 on the right of center 0
        let mut v = vec![-2.0, -1.8, -1.5, -1.1];
        v.extend((0..9).map(|i| 1.0 + 0.1 * i as f64));
        let s = set(&v);
        let t = interval_test(&s, 0.0, 1.0, 2.0, 0.9).unwrap();
        assert_eq!((t.left, t.right, t.verdict), (4, 9, Verdict::Fail));
        let t = interval_test(&s, 0.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(t.verdict, Verdict::Pass);
        assert!(interval_test(&s, 0.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn balanced_counts_always_pass() {
        let s = set(&[-1.0, -0.5, 0.5, 1.0]);
        let t = interval_test(&s, 0.0, 0.1, 2.0, 0.0).unwrap();
        assert_eq!(t.left, t.right);
        assert_eq!(t.verdict, Verdict::Pass);
    }

    #[test]
    fn enumeration_four_points() {
        let x = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(enumerate_heavy_lower_bound(&x, 0.1, 2).unwrap(), 2.0);
        assert_eq!(enumerate_heavy_upper_bound(&x, 0.1, 2).unwrap(), 1.0);
        assert_eq!(
            enumerate_heavy_lower_bound(&x, 2f64.sqrt(), 2).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn naive_scan_single_sample() {
        // gamma 1 and sqrt(2) form the whole list for n = 1; no test can fail there
        let fi = naive_feasible_scan(&set(&[3.0]), 1.0);
        assert_eq!((fi.lower, fi.upper), (f64::NEG_INFINITY, f64::INFINITY));
        // below 1 the empty left window against the sample itself fails at its own position
        let fi = naive_feasible_scan(&set(&[3.0]), 0.5);
        assert_eq!((fi.lower, fi.upper), (3.0, 3.0));
        assert!(fi.is_feasible());
    }

    #[test]
    fn cover_examples() {
        assert_eq!(power_of_two_cover(0, 0), ((0, 0), (0, 0)));
        assert_eq!(power_of_two_cover(3, 8), ((3, 6), (5, 8)));
        assert_eq!(power_of_two_cover(0, 7), ((0, 7), (0, 7)));
    }
}
