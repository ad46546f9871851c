//! Reference quadrature rules on the unit segment and the reference triangle.
//!
//! Segment rules are Gauss–Legendre on [0, 1]. Triangle rules are built from
//! a tensor Gauss rule under the Duffy map onto the reference triangle
//! {(x, y): x, y >= 0, x + y <= 1}; for a requested exactness degree `d` the
//! collapsed rule integrates every polynomial of total degree <= d exactly.

use crate::Vec2;
use thiserror::Error;

/// Largest exactness degree served by [`segment_rule`] / [`triangle_rule`].
pub const MAX_DEGREE: usize = 30;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature degree {0} exceeds supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
}

/// Quadrature rule on the unit segment [0, 1].
#[derive(Debug, Clone)]
pub struct SegRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Quadrature rule on the reference triangle.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence. Accurate to machine precision for n <= 64.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = (n as f64) * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss points on [0, 1], exact for polynomials of degree <= 2n-1.
pub fn gauss_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

/// Rule on [0, 1] exact for all polynomials of degree <= `degree`.
pub fn segment_rule(degree: usize) -> Result<SegRule, QuadError> {
    if degree > MAX_DEGREE {
        return Err(QuadError::DegreeTooLarge(degree));
    }
    let n = degree / 2 + 1;
    let (nodes, weights) = gauss_unit(n);
    Ok(SegRule {
        nodes,
        weights,
        degree,
    })
}

/// Rule on the reference triangle exact for all polynomials of total degree
/// <= `degree`.
///
/// Under the Duffy map (u, v) -> (u, v(1-u)) a total-degree-d polynomial
/// becomes degree d+1 in u (from the Jacobian 1-u) and degree d in v, so
/// n = ceil((d+2)/2) Gauss points per direction are exact.
pub fn triangle_rule(degree: usize) -> Result<TriRule, QuadError> {
    if degree > MAX_DEGREE {
        return Err(QuadError::DegreeTooLarge(degree));
    }
    let n = (degree + 2).div_ceil(2);
    let (gx, gw) = gauss_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &u) in gx.iter().enumerate() {
        for (j, &v) in gx.iter().enumerate() {
            points.push(Vec2::new(u, v * (1.0 - u)));
            weights.push(gw[i] * gw[j] * (1.0 - u));
        }
    }
    Ok(TriRule {
        points,
        weights,
        degree,
    })
}

/// Map a reference-triangle rule to a physical triangle (a, b, c).
/// Returned weights include the affine Jacobian |det|.
pub fn map_tri_rule(rule: &TriRule, a: Vec2, b: Vec2, c: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let e1 = b - a;
    let e2 = c - a;
    let jac = (e1.x * e2.y - e1.y * e2.x).abs();
    let pts = rule
        .points
        .iter()
        .map(|p| a + e1 * p.x + e2 * p.y)
        .collect();
    let wts = rule.weights.iter().map(|w| w * jac).collect();
    (pts, wts)
}

/// Map a unit-segment rule to the physical segment p -> q.
pub fn map_seg_rule(rule: &SegRule, p: Vec2, q: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let len = (q - p).norm();
    let pts = rule.nodes.iter().map(|&t| p + (q - p) * t).collect();
    let wts = rule.weights.iter().map(|w| w * len).collect();
    (pts, wts)
}
