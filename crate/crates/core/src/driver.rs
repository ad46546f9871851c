//! Field recovery, error norms, convergence studies and file output.

use crate::assembly::{assemble, AssemblyError, GlobalSystem};
use crate::basis::{dim_p2, ScalarBasis};
use crate::geometry::cut_element;
use crate::material::SymTensor;
use crate::problems::ManufacturedCase;
use crate::quadrature::{map_tri_rule, triangle_rule};
use crate::solver::{solve, SolveError, SolveReport};
use crate::spaces::{discretize, BlockStatus, Discretization, SpaceError};
use crate::{DVector, Vec2};
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("case error: {0}")]
    Case(#[from] crate::problems::CaseError),
}

/// Recovered per-element fields plus the trace coefficients they came from.
pub struct FieldSolution {
    /// Stress coefficients per element side (3 x dim P_{k-1}).
    pub sigma: Vec<DVector<f64>>,
    /// Displacement coefficients per element side (2 x dim P_k).
    pub disp: Vec<DVector<f64>>,
    pub traces: DVector<f64>,
    /// Max scaled residual of the local interior equations after
    /// back-substitution.
    pub recovery_residual: f64,
}

/// Back-substitute interior unknowns from the solved traces.
pub fn recover_fields(
    disc: &Discretization,
    sys: &GlobalSystem,
    traces: &DVector<f64>,
) -> FieldSolution {
    let k = disc.dofmap.k;
    let n_stress = 3 * dim_p2(k - 1);
    let bd = disc.dofmap.block_dofs();
    let mut sigma = vec![DVector::zeros(0); disc.dofmap.elem_sides.len()];
    let mut disp = vec![DVector::zeros(0); disc.dofmap.elem_sides.len()];
    let mut max_res: f64 = 0.0;
    for ce in &sys.elements {
        let mut m = DVector::zeros(ce.blocks.len() * bd);
        for (bi, &b) in ce.blocks.iter().enumerate() {
            match &disc.dofmap.blocks[b].status {
                BlockStatus::Free { offset } => {
                    for d in 0..bd {
                        m[bi * bd + d] = traces[offset + d];
                    }
                }
                BlockStatus::Fixed { values } => {
                    for d in 0..bd {
                        m[bi * bd + d] = values[d];
                    }
                }
            }
        }
        let rhs = &ce.r - &ce.p * &m;
        let x = ce.lu.solve(&rhs).expect("interior back-substitution");
        let res = (&ce.mt * &x - &rhs).amax();
        let scale = rhs.amax().max(x.amax()).max(1.0);
        max_res = max_res.max(res / scale);
        sigma[ce.elem_side] = x.rows(0, n_stress).into_owned();
        disp[ce.elem_side] = x.rows(n_stress, x.len() - n_stress).into_owned();
    }
    FieldSolution {
        sigma,
        disp,
        traces: traces.clone(),
        recovery_residual: max_res,
    }
}

/// Evaluate the discrete stress at points of one element side.
pub fn eval_sigma_h(
    disc: &Discretization,
    sol: &FieldSolution,
    es_id: usize,
    pts: &[Vec2],
) -> Vec<SymTensor> {
    let k = disc.dofmap.k;
    let ns = dim_p2(k - 1);
    let es = disc.dofmap.elem_sides[es_id];
    let sb = ScalarBasis::new(
        k - 1,
        disc.mesh.tri_centroid(es.elem),
        disc.mesh.tri_diameter(es.elem),
    );
    let vals = sb.eval(pts);
    let c = &sol.sigma[es_id];
    pts.iter()
        .enumerate()
        .map(|(q, _)| {
            let mut out = [0.0; 3];
            for comp in 0..3 {
                for m in 0..ns {
                    out[comp] += c[comp * ns + m] * vals[(q, m)];
                }
            }
            out
        })
        .collect()
}

/// Evaluate the discrete displacement (and optionally its strain) at points
/// of one element side.
pub fn eval_disp_h(
    disc: &Discretization,
    sol: &FieldSolution,
    es_id: usize,
    pts: &[Vec2],
) -> (Vec<[f64; 2]>, Vec<SymTensor>) {
    let k = disc.dofmap.k;
    let nu = dim_p2(k);
    let es = disc.dofmap.elem_sides[es_id];
    let ub = ScalarBasis::new(
        k,
        disc.mesh.tri_centroid(es.elem),
        disc.mesh.tri_diameter(es.elem),
    );
    let (vals, dx, dy) = ub.eval_grad(pts);
    let c = &sol.disp[es_id];
    let mut us = Vec::with_capacity(pts.len());
    let mut strains = Vec::with_capacity(pts.len());
    for q in 0..pts.len() {
        let mut u = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for comp in 0..2 {
            for m in 0..nu {
                let cm = c[comp * nu + m];
                u[comp] += cm * vals[(q, m)];
                grad[comp][0] += cm * dx[(q, m)];
                grad[comp][1] += cm * dy[(q, m)];
            }
        }
        us.push(u);
        strains.push([
            grad[0][0],
            grad[1][1],
            0.5 * (grad[0][1] + grad[1][0]),
        ]);
    }
    (us, strains)
}

/// Relative (and absolute) L2 error norms over the active region.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub u_rel: f64,
    pub sigma_rel: f64,
    pub strain_rel: f64,
    pub u_abs: f64,
    pub sigma_abs: f64,
    pub strain_abs: f64,
    /// Set when an exact-field norm vanishes; the `_rel` fields then carry
    /// absolute values.
    pub zero_denominator: bool,
}

/// Cut-aware error quadrature degree.
pub fn error_degree(k: usize) -> usize {
    (2 * k + 4).max(14)
}

/// L2 errors of stress, displacement and strain against the exact fields.
pub fn compute_errors(
    disc: &Discretization,
    case: &ManufacturedCase,
    sol: &FieldSolution,
) -> ErrorNorms {
    let deg = error_degree(disc.dofmap.k);
    let tri = triangle_rule(deg).expect("triangle rule");
    let acc: Vec<[f64; 6]> = (0..disc.dofmap.elem_sides.len())
        .into_par_iter()
        .map(|es_id| {
            let es = disc.dofmap.elem_sides[es_id];
            let (pts, wts) = if disc.class.is_cut(es.elem) {
                let cell = cut_element(&disc.mesh, es.elem, &case.geometry, &disc.class, deg)
                    .expect("cut cell for error quadrature");
                (
                    cell.side_pts[es.side.index()].clone(),
                    cell.side_wts[es.side.index()].clone(),
                )
            } else {
                let [a, b, c] = disc.mesh.tri_vertices(es.elem);
                map_tri_rule(&tri, a, b, c)
            };
            let sh = eval_sigma_h(disc, sol, es_id, &pts);
            let (uh, eh) = eval_disp_h(disc, sol, es_id, &pts);
            let mut a = [0.0f64; 6];
            for (q, &w) in wts.iter().enumerate() {
                let ue = case.u(pts[q], es.side);
                let se = case.sigma(pts[q], es.side);
                let ee = case.strain(pts[q], es.side);
                let du = (uh[q][0] - ue[0]).powi(2) + (uh[q][1] - ue[1]).powi(2);
                let ds = (sh[q][0] - se[0]).powi(2)
                    + (sh[q][1] - se[1]).powi(2)
                    + 2.0 * (sh[q][2] - se[2]).powi(2);
                let de = (eh[q][0] - ee[0]).powi(2)
                    + (eh[q][1] - ee[1]).powi(2)
                    + 2.0 * (eh[q][2] - ee[2]).powi(2);
                a[0] += w * du;
                a[1] += w * ds;
                a[2] += w * de;
                a[3] += w * (ue[0] * ue[0] + ue[1] * ue[1]);
                a[4] += w * (se[0] * se[0] + se[1] * se[1] + 2.0 * se[2] * se[2]);
                a[5] += w * (ee[0] * ee[0] + ee[1] * ee[1] + 2.0 * ee[2] * ee[2]);
            }
            a
        })
        .collect();
    let mut total = [0.0f64; 6];
    for a in acc {
        for i in 0..6 {
            total[i] += a[i];
        }
    }
    let [eu, es_, ee, nu, ns, ne] = total.map(|v| v.max(0.0).sqrt());
    let zero = nu == 0.0 || ns == 0.0;
    let rel = |e: f64, n: f64| if n > 0.0 { e / n } else { e };
    ErrorNorms {
        u_rel: rel(eu, nu),
        sigma_rel: rel(es_, ns),
        strain_rel: rel(ee, ne),
        u_abs: eu,
        sigma_abs: es_,
        strain_abs: ee,
        zero_denominator: zero,
    }
}

/// One line of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_sigma: f64,
    pub order_u: Option<f64>,
    pub order_sigma: Option<f64>,
}

/// Discretize, assemble, solve and recover one run.
pub fn solve_case(
    case: &ManufacturedCase,
    n: usize,
    k: usize,
) -> Result<(Discretization, GlobalSystem, FieldSolution, SolveReport), DriverError> {
    let disc = discretize(case, n, k)?;
    let sys = assemble(&disc, case)?;
    let (traces, report) = solve(&sys.trace, disc.dofmap.block_dofs())?;
    let sol = recover_fields(&disc, &sys, &traces);
    Ok((disc, sys, sol, report))
}

/// Run a mesh-refinement study and return the convergence table.
pub fn run_study(
    case: &ManufacturedCase,
    k: usize,
    ns: &[usize],
) -> Result<Vec<ConvergenceRow>, DriverError> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let (disc, _, sol, _) = solve_case(case, n, k)?;
        let err = compute_errors(&disc, case, &sol);
        let h = (0..disc.mesh.triangles.len())
            .map(|t| disc.mesh.tri_diameter(t))
            .fold(0.0f64, f64::max);
        let (order_u, order_sigma) = match rows.last() {
            Some(prev) => {
                let ratio = (n as f64 / prev.n as f64).ln();
                (
                    Some((prev.err_u / err.u_rel).ln() / ratio),
                    Some((prev.err_sigma / err.sigma_rel).ln() / ratio),
                )
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h,
            err_u: err.u_rel,
            err_sigma: err.sigma_rel,
            order_u,
            order_sigma,
        });
    }
    Ok(rows)
}

/// Write a convergence table as CSV (columns: N,h,err_u,order_u,err_sigma,order_sigma).
pub fn write_csv(path: &std::path::Path, rows: &[ConvergenceRow]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "N,h,err_u,order_u,err_sigma,order_sigma")?;
    for r in rows {
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(
            f,
            "{},{:.6e},{:.6e},{},{:.6e},{}",
            r.n,
            r.h,
            r.err_u,
            fmt(r.order_u),
            r.err_sigma,
            fmt(r.order_sigma)
        )?;
    }
    Ok(())
}

/// Dump sampled discrete fields as plain text: x y u1 u2 s11 s12 s22.
pub fn dump_fields(
    case: &ManufacturedCase,
    n: usize,
    k: usize,
    path: &std::path::Path,
) -> Result<(), DriverError> {
    let (disc, _, sol, _) = solve_case(case, n, k)?;
    let tri = triangle_rule(2).expect("triangle rule");
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "# x y u1 u2 s11 s12 s22")?;
    for es_id in 0..disc.dofmap.elem_sides.len() {
        let es = disc.dofmap.elem_sides[es_id];
        let (pts, _) = if disc.class.is_cut(es.elem) {
            let cell = disc.cells[es.elem].as_ref().unwrap();
            (cell.side_pts[es.side.index()].clone(), ())
        } else {
            let [a, b, c] = disc.mesh.tri_vertices(es.elem);
            (map_tri_rule(&tri, a, b, c).0, ())
        };
        let sh = eval_sigma_h(&disc, &sol, es_id, &pts);
        let (uh, _) = eval_disp_h(&disc, &sol, es_id, &pts);
        for (q, p) in pts.iter().enumerate() {
            writeln!(
                f,
                "{:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e}",
                p.x, p.y, uh[q][0], uh[q][1], sh[q][0], sh[q][2], sh[q][1]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_from_error_ratio() {
        // errors (1e-1, 2.5e-2) on n = (8, 16): order log2(4) = 2.
        let e0: f64 = 1e-1;
        let e1: f64 = 2.5e-2;
        let order = (e0 / e1).ln() / (16.0f64 / 8.0).ln();
        assert!((order - 2.0).abs() < 1e-12);
    }
}
