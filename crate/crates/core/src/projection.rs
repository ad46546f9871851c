//! Local L2 projections onto element and face polynomial spaces.
//!
//! Projections are computed against explicit quadrature rules so the same
//! entry points serve whole elements, cut sub-regions and edge portions. All
//! local solves go through a pivoted dense factorization.

use crate::basis::{ScalarBasis, SegBasis};
use crate::{DMatrix, DVector, Vec2};

/// L2-project `f` onto the span of `basis` over the region described by the
/// quadrature points/weights. Returns the coefficient vector.
///
/// Near-singular Gram matrices (sliver cut regions) are still solved via the
/// pivoted factorization; a truly singular system panics with a descriptive
/// message, which only happens for zero-measure regions.
pub fn project_scalar(
    basis: &ScalarBasis,
    pts: &[Vec2],
    wts: &[f64],
    f: impl Fn(Vec2) -> f64,
) -> DVector<f64> {
    let vals = basis.eval(pts);
    project_with_values(&vals, pts, wts, f)
}

/// Same as [`project_scalar`] for a segment trace basis on an edge portion or
/// interface face.
pub fn project_segment(
    basis: &SegBasis,
    pts: &[Vec2],
    wts: &[f64],
    f: impl Fn(Vec2) -> f64,
) -> DVector<f64> {
    let vals = basis.eval(pts);
    project_with_values(&vals, pts, wts, f)
}

fn project_with_values(
    vals: &DMatrix<f64>,
    pts: &[Vec2],
    wts: &[f64],
    f: impl Fn(Vec2) -> f64,
) -> DVector<f64> {
    let n = vals.ncols();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (q, &w) in wts.iter().enumerate() {
        let fv = f(pts[q]);
        for i in 0..n {
            let vi = vals[(q, i)];
            rhs[i] += w * fv * vi;
            for j in 0..n {
                gram[(i, j)] += w * vi * vals[(q, j)];
            }
        }
    }
    gram.lu()
        .solve(&rhs)
        .expect("singular projection Gram matrix (zero-measure region?)")
}

/// Weighted L2 error of `f - p` over the rule, with `p` given by basis
/// coefficients.
pub fn l2_error_scalar(
    basis: &ScalarBasis,
    coeff: &DVector<f64>,
    pts: &[Vec2],
    wts: &[f64],
    f: impl Fn(Vec2) -> f64,
) -> f64 {
    let vals = basis.eval(pts);
    let mut err2 = 0.0;
    for (q, &w) in wts.iter().enumerate() {
        let mut p = 0.0;
        for i in 0..coeff.len() {
            p += coeff[i] * vals[(q, i)];
        }
        let d = f(pts[q]) - p;
        err2 += w * d * d;
    }
    err2.max(0.0)
}

/// Condition number (ratio of extreme absolute eigenvalues) of a symmetric
/// matrix; used to quantify trace-basis conditioning.
pub fn sym_condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in eig.eigenvalues.iter() {
        let a = v.abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Gram matrix of arbitrary basis values under the rule weights.
pub fn gram_from_values(vals: &DMatrix<f64>, wts: &[f64]) -> DMatrix<f64> {
    let n = vals.ncols();
    let mut gram = DMatrix::zeros(n, n);
    for (q, &w) in wts.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += w * vals[(q, i)] * vals[(q, j)];
            }
        }
    }
    gram
}
