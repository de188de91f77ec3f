//! Piecewise-linear densities: exact cdf, quantile and breakpoint lists.

/// One piece `[lo, hi)` carrying density `alpha + beta * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Piece {
    fn density_at(&self, x: f64) -> f64 {
        self.alpha + self.beta * x
    }

    /// Mass of `[lo, lo + t)`.
    fn partial_mass(&self, t: f64) -> f64 {
        let d0 = self.density_at(self.lo);
        d0 * t + 0.5 * self.beta * t * t
    }

    fn mass(&self) -> f64 {
        self.partial_mass(self.hi - self.lo)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Piecewise {
    pieces: Vec<Piece>,
    // cumulative mass at the start of each piece, normalised so the total is 1
    starts: Vec<f64>,
    total: f64,
}

impl Piecewise {
    /// Builds from pieces given on the half line `|x| >= 0` as `(lo, hi, alpha, beta)` in
    /// the variable `a = |x|`; the density is mirrored to `x < 0` and translated by `center`.
    /// Zero-density and empty pieces are dropped.
    pub fn symmetric(half: &[(f64, f64, f64, f64)], center: f64) -> Self {
        let mut pieces = Vec::with_capacity(2 * half.len());
        for &(lo, hi, alpha, beta) in half {
            if !(hi > lo) {
                continue;
            }
            if alpha == 0.0 && beta == 0.0 {
                continue;
            }
            // a = x - center on the right: alpha + beta (x - c)
            pieces.push(Piece {
                lo: center + lo,
                hi: center + hi,
                alpha: alpha - beta * center,
                beta,
            });
            // a = c - x on the left: alpha + beta (c - x)
            pieces.push(Piece {
                lo: center - hi,
                hi: center - lo,
                alpha: alpha + beta * center,
                beta: -beta,
            });
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += p.mass();
        }
        let total = acc;
        for s in &mut starts {
            *s /= total;
        }
        Self { pieces, starts, total }
    }

    /// Un-normalised total mass, for normalisation checks.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = self.pieces.first().map_or(0.0, |p| p.lo);
        let hi = self.pieces.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn cdf(&self, x: f64) -> f64 {
        // last piece with lo <= x
        let idx = self.pieces.partition_point(|p| p.lo <= x);
        if idx == 0 {
            return 0.0;
        }
        let p = &self.pieces[idx - 1];
        let t = (x.min(p.hi) - p.lo).max(0.0);
        let v = self.starts[idx - 1] + p.partial_mass(t) / self.total;
        v.clamp(0.0, 1.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        // last piece whose start mass is <= u, skipping to a piece with positive mass
        let mut idx = self.starts.partition_point(|&s| s <= u).max(1) - 1;
        while idx + 1 < self.pieces.len() && self.pieces[idx].mass() <= 0.0 {
            idx += 1;
        }
        let p = &self.pieces[idx];
        let r = ((u - self.starts[idx]) * self.total).max(0.0);
        let d0 = p.density_at(p.lo);
        let disc = (d0 * d0 + 2.0 * p.beta * r).max(0.0);
        let denom = d0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (p.lo + t).clamp(p.lo, p.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Piecewise {
        Piecewise::symmetric(&[(0.0, 1.0, 1.0, -1.0)], 0.0)
    }

    #[test]
    fn triangle_cdf_closed_form() {
        let t = triangle();
        assert!((t.total_mass() - 1.0).abs() < 1e-15);
        for &x in &[-1.5, -1.0, -0.5, 0.0, 0.25, 0.9, 1.0, 2.0] {
            let exact: f64 = if x <= -1.0 {
                0.0
            } else if x <= 0.0 {
                0.5 * (1.0 + x) * (1.0 + x)
            } else if x < 1.0 {
                1.0 - 0.5 * (1.0 - x) * (1.0 - x)
            } else {
                1.0
            };
            assert!((t.cdf(x) - exact).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let t = Piecewise::symmetric(
            &[(0.0, 0.25, 1.0, 0.0), (0.5, 0.75, 0.5, 0.0), (0.75, 1.0, 1.0, -1.0)],
            0.3,
        );
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            let q = t.quantile(u);
            assert!((t.cdf(q) - u).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn mirrored_translated_support() {
        let t = Piecewise::symmetric(&[(0.0, 1.0, 1.0, -1.0)], 5.0);
        assert_eq!(t.support(), (4.0, 6.0));
        assert_eq!(t.breakpoints(), vec![4.0, 5.0, 6.0]);
        assert!((t.cdf(5.0) - 0.5).abs() < 1e-15);
    }
}
