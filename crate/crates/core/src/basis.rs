//! Scaled monomial bases on elements and dominant-coordinate bases on
//! skeleton segments.
//!
//! Element bases are monomials in ((x-cx)/d, (y-cy)/d) of total degree <= k,
//! centered at the element centroid and scaled by the element diameter.
//! Segment trace bases are the k+1 functions {1, s, ..., s^k} of the dominant
//! coordinate of the segment (x if |dx| >= |dy|, else y), centered at the
//! segment midpoint and scaled by the segment extent. Restricting the full 2D
//! polynomial space to a nearly straight, nearly axis-aligned face makes x
//! and y close to linearly dependent and the face mass matrix arbitrarily
//! ill-conditioned; the dominant-coordinate basis spans the same trace space
//! on straight faces without that degeneracy.

use crate::{DMatrix, Vec2};

/// Number of monomials of total degree <= k in two variables.
pub fn dim_p2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponent pairs (i, j) for the 2D monomial basis, by total degree then
/// descending x-power. Deterministic ordering shared by all evaluations.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_p2(k));
    for t in 0..=k {
        for j in 0..=t {
            out.push((t - j, j));
        }
    }
    out
}

/// Scaled-and-shifted monomial basis of total degree <= `degree` on a 2D
/// region.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub degree: usize,
    pub center: Vec2,
    pub scale: f64,
}

impl ScalarBasis {
    pub fn new(degree: usize, center: Vec2, scale: f64) -> Self {
        assert!(scale > 0.0, "basis scale must be positive");
        Self {
            degree,
            center,
            scale,
        }
    }

    pub fn len(&self) -> usize {
        dim_p2(self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values at `points`: matrix with one row per point, one column per
    /// basis function.
    pub fn eval(&self, points: &[Vec2]) -> DMatrix<f64> {
        let exps = exponents(self.degree);
        let mut m = DMatrix::zeros(points.len(), exps.len());
        for (r, p) in points.iter().enumerate() {
            let xh = (p.x - self.center.x) / self.scale;
            let yh = (p.y - self.center.y) / self.scale;
            let xp = powers(xh, self.degree);
            let yp = powers(yh, self.degree);
            for (c, &(i, j)) in exps.iter().enumerate() {
                m[(r, c)] = xp[i] * yp[j];
            }
        }
        m
    }

    /// Values and Cartesian gradients at `points`; returns (vals, dx, dy).
    pub fn eval_grad(&self, points: &[Vec2]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let exps = exponents(self.degree);
        let n = exps.len();
        let mut vals = DMatrix::zeros(points.len(), n);
        let mut dx = DMatrix::zeros(points.len(), n);
        let mut dy = DMatrix::zeros(points.len(), n);
        let inv = 1.0 / self.scale;
        for (r, p) in points.iter().enumerate() {
            let xh = (p.x - self.center.x) * inv;
            let yh = (p.y - self.center.y) * inv;
            let xp = powers(xh, self.degree);
            let yp = powers(yh, self.degree);
            for (c, &(i, j)) in exps.iter().enumerate() {
                vals[(r, c)] = xp[i] * yp[j];
                dx[(r, c)] = if i > 0 {
                    i as f64 * xp[i - 1] * yp[j] * inv
                } else {
                    0.0
                };
                dy[(r, c)] = if j > 0 {
                    j as f64 * xp[i] * yp[j - 1] * inv
                } else {
                    0.0
                };
            }
        }
        (vals, dx, dy)
    }
}

/// Dominant coordinate of a segment trace basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Trace basis {1, s, ..., s^k} in the dominant coordinate of a skeleton
/// face, centered and scaled by the face extent.
#[derive(Debug, Clone)]
pub struct SegBasis {
    pub degree: usize,
    pub axis: Axis,
    pub center: f64,
    pub scale: f64,
}

impl SegBasis {
    /// Basis for the (possibly curved) face with chord endpoints p -> q.
    pub fn from_endpoints(degree: usize, p: Vec2, q: Vec2) -> Self {
        let d = q - p;
        let axis = if d.x.abs() >= d.y.abs() { Axis::X } else { Axis::Y };
        let (a, b) = match axis {
            Axis::X => (p.x, q.x),
            Axis::Y => (p.y, q.y),
        };
        let scale = (b - a).abs().max(1e-300);
        Self {
            degree,
            axis,
            center: 0.5 * (a + b),
            scale,
        }
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, p: &Vec2) -> f64 {
        match self.axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        }
    }

    pub fn eval(&self, points: &[Vec2]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.degree + 1);
        for (r, p) in points.iter().enumerate() {
            let s = (self.coord(p) - self.center) / self.scale;
            let mut v = 1.0;
            for c in 0..=self.degree {
                m[(r, c)] = v;
                v *= s;
            }
        }
        m
    }
}

fn powers(x: f64, k: usize) -> Vec<f64> {
    let mut out = vec![1.0; k + 1];
    for i in 1..=k {
        out[i] = out[i - 1] * x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::triangle_rule;

    #[test]
    fn cardinality() {
        assert_eq!(dim_p2(0), 1);
        assert_eq!(dim_p2(1), 3);
        assert_eq!(dim_p2(2), 6);
        let b = SegBasis::from_endpoints(2, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.2));
        assert_eq!(b.len(), 3);
        assert_eq!(b.axis, Axis::X);
    }

    #[test]
    fn constant_function_is_one() {
        let b = ScalarBasis::new(2, Vec2::new(0.3, 0.4), 0.7);
        let v = b.eval(&[Vec2::new(0.9, -0.2)]);
        assert_eq!(v[(0, 0)], 1.0);
    }

    #[test]
    fn linear_function_vanishes_at_center() {
        let c = Vec2::new(1.0 / 3.0, 1.0 / 3.0);
        let b = ScalarBasis::new(1, c, 2.0_f64.sqrt());
        let v = b.eval(&[c]);
        // columns: 1, x-hat, y-hat
        assert!((v[(0, 1)]).abs() < 1e-15);
        assert!((v[(0, 2)]).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = ScalarBasis::new(3, Vec2::new(0.2, 0.1), 0.9);
        let pts = [
            Vec2::new(0.11, 0.92),
            Vec2::new(-0.43, 0.27),
            Vec2::new(0.68, -0.55),
            Vec2::new(0.05, 0.05),
            Vec2::new(0.91, 0.33),
            Vec2::new(-0.21, -0.78),
            Vec2::new(0.46, 0.64),
            Vec2::new(-0.09, 0.13),
            Vec2::new(0.72, -0.16),
            Vec2::new(0.39, 0.81),
        ];
        let h = 1e-6;
        let (_, dx, dy) = b.eval_grad(&pts);
        for (r, p) in pts.iter().enumerate() {
            let vxp = b.eval(&[p + Vec2::new(h, 0.0)]);
            let vxm = b.eval(&[p - Vec2::new(h, 0.0)]);
            let vyp = b.eval(&[p + Vec2::new(0.0, h)]);
            let vym = b.eval(&[p - Vec2::new(0.0, h)]);
            for c in 0..b.len() {
                let fdx = (vxp[(0, c)] - vxm[(0, c)]) / (2.0 * h);
                let fdy = (vyp[(0, c)] - vym[(0, c)]) / (2.0 * h);
                let sx = dx[(r, c)].abs().max(1.0);
                let sy = dy[(r, c)].abs().max(1.0);
                assert!(
                    (dx[(r, c)] - fdx).abs() / sx < 1e-7,
                    "d/dx basis {c} at point {r}"
                );
                assert!(
                    (dy[(r, c)] - fdy).abs() / sy < 1e-7,
                    "d/dy basis {c} at point {r}"
                );
            }
        }
    }

    #[test]
    fn element_mass_matrix_nonsingular() {
        // Local mass matrix on the reference triangle must be invertible.
        let rule = triangle_rule(6).unwrap();
        let b = ScalarBasis::new(2, Vec2::new(1.0 / 3.0, 1.0 / 3.0), 1.0);
        let v = b.eval(&rule.points);
        let mut gram: DMatrix<f64> = DMatrix::zeros(b.len(), b.len());
        for (q, &w) in rule.weights.iter().enumerate() {
            for i in 0..b.len() {
                for j in 0..b.len() {
                    gram[(i, j)] += w * v[(q, i)] * v[(q, j)];
                }
            }
        }
        assert!(gram.clone().lu().is_invertible());
    }

    #[test]
    fn dominant_axis_selection() {
        let bx = SegBasis::from_endpoints(1, Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.4));
        assert_eq!(bx.axis, Axis::X);
        let by = SegBasis::from_endpoints(1, Vec2::new(0.0, 0.0), Vec2::new(0.4, 0.5));
        assert_eq!(by.axis, Axis::Y);
    }
}
