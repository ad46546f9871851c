//! Element-local assembly of the X-HDG scheme, static condensation, and the
//! global condensed trace system.
//!
//! Per element side the local saddle system couples the stress block (degree
//! k-1 symmetric tensors), the displacement block (degree k vectors) and the
//! adjacent trace blocks. Rows are sign-normalized so the whole system is
//! symmetric:
//!
//!   -(A s, w) - (u, div w)  + <u_hat, w n>          = 0
//!   -(div s, v) + <tau (u - u_hat), v>              = (f, v)
//!   <s n, mu> - <tau (u - u_hat), mu>               = <g, mu>
//!
//! with interface/boundary faces entering exactly like edge faces (their
//! stabilization eta shares the 2 mu_i / h_K value). Eliminating the interior
//! unknowns gives a symmetric Schur contribution per element side on the
//! adjacent trace dofs; shared trace blocks accumulate from both sides.

use crate::basis::{dim_p2, ScalarBasis};
use crate::geometry::{interface_rule, EdgeTag, ElemTag, Side};
use crate::material::Material;
use crate::problems::{ManufacturedCase, Scheme};
use crate::quadrature::{map_seg_rule, map_tri_rule, segment_rule, triangle_rule};
use crate::spaces::{BlockStatus, BlockSupport, Discretization};
use crate::{DMatrix, DVector, Vec2};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("quadrature self-check failed on element {elem}: coarse {coarse:e} vs refined {refined:e}")]
    QuadratureCheck {
        elem: usize,
        coarse: f64,
        refined: f64,
    },
    #[error("interior block of element {elem} is singular (degenerate cut region)")]
    SingularInterior { elem: usize },
}

/// Extra load applied to a trace block while assembling one element side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LoadKind {
    None,
    /// Surface traction <g_N, mu> with the coupling normal.
    Neumann,
    /// Interface traction jump <g_N^Gamma, mu>, assembled once per face.
    InterfaceJump,
}

/// One face coupling of an element side: a trace block plus the quadrature
/// rule on the shared portion, with normals outward from this element side.
pub(crate) struct Coupling {
    pub(crate) block: usize,
    pub(crate) pts: Vec<Vec2>,
    pub(crate) wts: Vec<f64>,
    pub(crate) normals: Vec<Vec2>,
    pub(crate) load: LoadKind,
}

/// Condensed contribution of one element side, with the data needed to
/// recover interior unknowns afterwards.
pub struct CondensedElement {
    pub elem_side: usize,
    /// Adjacent trace blocks in local column order.
    pub blocks: Vec<usize>,
    /// Interior saddle matrix and its factorization.
    pub mt: DMatrix<f64>,
    pub lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub p: DMatrix<f64>,
    pub r: DVector<f64>,
    /// Schur complement on the adjacent trace dofs and its right-hand side.
    pub s: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Global condensed system over free trace dofs (full symmetric storage).
pub struct TraceSystem {
    pub n: usize,
    pub entries: Vec<(u32, u32, f64)>,
    pub rhs: DVector<f64>,
}

impl TraceSystem {
    /// max |A - A^T| / max |A|, via a hash of the assembled entries.
    pub fn symmetry_error(&self) -> f64 {
        use std::collections::HashMap;
        let mut map: HashMap<(u32, u32), f64> = HashMap::new();
        for &(i, j, v) in &self.entries {
            *map.entry((i, j)).or_insert(0.0) += v;
        }
        let mut max_abs: f64 = 0.0;
        let mut max_asym: f64 = 0.0;
        for (&(i, j), &v) in &map {
            max_abs = max_abs.max(v.abs());
            let vt = map.get(&(j, i)).copied().unwrap_or(0.0);
            max_asym = max_asym.max((v - vt).abs());
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_asym / max_abs
        }
    }

    /// y = A x for the assembled symmetric matrix.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for &(i, j, v) in &self.entries {
            y[i as usize] += v * x[j as usize];
        }
        y
    }
}

pub struct GlobalSystem {
    pub trace: TraceSystem,
    pub elements: Vec<CondensedElement>,
}

/// Assemble the fully condensed trace system for a discretized case.
pub fn assemble(disc: &Discretization, case: &ManufacturedCase) -> Result<GlobalSystem, AssemblyError> {
    quadrature_self_check(disc, case)?;

    let locals: Vec<Result<CondensedElement, AssemblyError>> = (0..disc.dofmap.elem_sides.len())
        .into_par_iter()
        .map(|es| condense_element_side(disc, case, es))
        .collect();

    let block_dofs = disc.dofmap.block_dofs();
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    let mut rhs = DVector::zeros(disc.dofmap.n_free);
    let mut elements = Vec::with_capacity(locals.len());
    for local in locals {
        let ce = local?;
        // Scatter: free columns into the matrix, fixed columns onto the rhs.
        let nb = ce.blocks.len();
        for bi in 0..nb {
            let row_block = &disc.dofmap.blocks[ce.blocks[bi]];
            let BlockStatus::Free { offset: ro } = row_block.status else {
                continue;
            };
            for i in 0..block_dofs {
                let gi = (ro + i) as u32;
                let li = bi * block_dofs + i;
                rhs[gi as usize] += ce.b[li];
                for bj in 0..nb {
                    let col_block = &disc.dofmap.blocks[ce.blocks[bj]];
                    for j in 0..block_dofs {
                        let lj = bj * block_dofs + j;
                        let v = ce.s[(li, lj)];
                        if v == 0.0 {
                            continue;
                        }
                        match &col_block.status {
                            BlockStatus::Free { offset: co } => {
                                entries.push((gi, (co + j) as u32, v));
                            }
                            BlockStatus::Fixed { values } => {
                                rhs[gi as usize] -= v * values[j];
                            }
                        }
                    }
                }
            }
        }
        elements.push(ce);
    }

    Ok(GlobalSystem {
        trace: TraceSystem {
            n: disc.dofmap.n_free,
            entries,
            rhs,
        },
        elements,
    })
}

/// Volume rule of one element side at the discretization's degree.
pub fn volume_rule(disc: &Discretization, elem: usize, side: Side) -> (Vec<Vec2>, Vec<f64>) {
    match &disc.cells[elem] {
        Some(cell) => (
            cell.side_pts[side.index()].clone(),
            cell.side_wts[side.index()].clone(),
        ),
        None => {
            let rule = triangle_rule(disc.quad_degree).expect("triangle rule");
            let [a, b, c] = disc.mesh.tri_vertices(elem);
            map_tri_rule(&rule, a, b, c)
        }
    }
}

pub(crate) fn couplings_for(
    disc: &Discretization,
    case: &ManufacturedCase,
    es_id: usize,
) -> Vec<Coupling> {
    let es = disc.dofmap.elem_sides[es_id];
    let elem = es.elem;
    let elem_cut = disc.class.is_cut(elem);
    let seg = segment_rule(disc.quad_degree).expect("segment rule");
    let mut out = Vec::new();

    for &e in &disc.mesh.tri_edges[elem] {
        let outward = disc.mesh.edge_outward_normal(e, elem);
        for &b in &disc.dofmap.blocks_of_edge[e] {
            let block = &disc.dofmap.blocks[b];
            let BlockSupport::Edge {
                side,
                t0,
                t1,
                on_interface,
                ..
            } = block.support
            else {
                unreachable!()
            };
            // A cut element side couples only to its own side of the
            // skeleton; an uncut element spans the whole edge and couples to
            // every portion (this covers uncut elements next to the crack
            // tip whose edge is split).
            let couples = match side {
                Some(s) => !elem_cut || s == es.side,
                None => {
                    if elem_cut {
                        matches!(disc.class.edge_tags[e], EdgeTag::Uncut(s) if s == es.side)
                    } else {
                        true
                    }
                }
            };
            if !couples {
                continue;
            }
            let (p, q) = disc.mesh.edge_points(e);
            let (pts, wts) = map_seg_rule(&seg, p + (q - p) * t0, p + (q - p) * t1);
            let normals = vec![outward; pts.len()];
            let load = if block.neumann {
                LoadKind::Neumann
            } else if on_interface && es.side == Side::One {
                LoadKind::InterfaceJump
            } else {
                LoadKind::None
            };
            out.push(Coupling {
                block: b,
                pts,
                wts,
                normals,
                load,
            });
        }
    }

    for &b in &disc.dofmap.face_blocks_of_elem[elem] {
        let block = &disc.dofmap.blocks[b];
        let BlockSupport::CutFace { side, .. } = block.support else {
            unreachable!()
        };
        if let Some(s) = side {
            if s != es.side {
                continue;
            }
        }
        let cell = disc.cells[elem].as_ref().expect("cut cell");
        let (pts, wts, mut normals) = interface_rule(cell, disc.quad_degree);
        // Rule normals point side 1 -> side 2 = outward from side 1.
        if es.side == Side::Two {
            for n in normals.iter_mut() {
                *n = -*n;
            }
        }
        let load = if block.neumann {
            LoadKind::Neumann
        } else if case.scheme == Scheme::Interface && es.side == Side::One {
            LoadKind::InterfaceJump
        } else {
            LoadKind::None
        };
        out.push(Coupling {
            block: b,
            pts,
            wts,
            normals,
            load,
        });
    }

    out
}

/// Uncondensed local matrices of one element side.
pub(crate) struct LocalParts {
    pub(crate) mt: DMatrix<f64>,
    pub(crate) p: DMatrix<f64>,
    pub(crate) h: DMatrix<f64>,
    pub(crate) r: DVector<f64>,
    pub(crate) g: DVector<f64>,
    pub(crate) blocks: Vec<usize>,
}

pub(crate) fn assemble_local_parts(
    disc: &Discretization,
    case: &ManufacturedCase,
    es_id: usize,
) -> LocalParts {
    let es = disc.dofmap.elem_sides[es_id];
    let elem = es.elem;
    let k = disc.dofmap.k;
    let ns = dim_p2(k - 1);
    let nu = dim_p2(k);
    let n_stress = 3 * ns;
    let n_disp = 2 * nu;
    let ni = n_stress + n_disp;
    let nb = disc.dofmap.block_dofs();
    let ntr = k + 1;

    let centroid = disc.mesh.tri_centroid(elem);
    let h_k = disc.mesh.tri_diameter(elem);
    let sb = ScalarBasis::new(k - 1, centroid, h_k);
    let ub = ScalarBasis::new(k, centroid, h_k);
    let material: &Material = &case.material;
    let tau = material.stabilization(es.side, h_k);
    let gram = material.compliance_gram(es.side);

    let (vpts, vwts) = volume_rule(disc, elem, es.side);
    let couplings = couplings_for(disc, case, es_id);
    let nc = couplings.len() * nb;

    let mut mt = DMatrix::zeros(ni, ni);
    let mut p = DMatrix::zeros(ni, nc);
    let mut h = DMatrix::zeros(nc, nc);
    let mut r = DVector::zeros(ni);
    let mut g = DVector::zeros(nc);

    // Volume terms: -(A s, w), -(u, div w) (+ mirror), (f, v).
    let (sv, sdx, sdy) = sb.eval_grad(&vpts);
    let uv = ub.eval(&vpts);
    for (q, &w) in vwts.iter().enumerate() {
        for m in 0..ns {
            for l in 0..ns {
                let mass = w * sv[(q, m)] * sv[(q, l)];
                for c in 0..3 {
                    for d in 0..3 {
                        if gram[c][d] != 0.0 {
                            mt[(c * ns + m, d * ns + l)] -= gram[c][d] * mass;
                        }
                    }
                }
            }
            // div(E_c phi): c=0 -> (dx,0), c=1 -> (0,dy), c=2 -> (dy,dx).
            let div = [
                [sdx[(q, m)], 0.0],
                [0.0, sdy[(q, m)]],
                [sdy[(q, m)], sdx[(q, m)]],
            ];
            for c in 0..3 {
                let row = c * ns + m;
                for cu in 0..2 {
                    if div[c][cu] == 0.0 {
                        continue;
                    }
                    for mu in 0..nu {
                        let val = w * div[c][cu] * uv[(q, mu)];
                        let col = n_stress + cu * nu + mu;
                        mt[(row, col)] -= val;
                        mt[(col, row)] -= val;
                    }
                }
            }
        }
        let f = case.body_force(vpts[q], es.side);
        for cu in 0..2 {
            for mu in 0..nu {
                r[n_stress + cu * nu + mu] += w * f[cu] * uv[(q, mu)];
            }
        }
    }

    // Face terms per coupling.
    for (ci, cp) in couplings.iter().enumerate() {
        let col0 = ci * nb;
        let block = &disc.dofmap.blocks[cp.block];
        let rho = block.basis.eval(&cp.pts);
        let svf = sb.eval(&cp.pts);
        let uvf = ub.eval(&cp.pts);
        for (q, &w) in cp.wts.iter().enumerate() {
            let n = cp.normals[q];
            // Stabilization mass on the displacement block.
            for mu in 0..nu {
                for mv in 0..nu {
                    let val = w * tau * uvf[(q, mu)] * uvf[(q, mv)];
                    for cu in 0..2 {
                        mt[(n_stress + cu * nu + mu, n_stress + cu * nu + mv)] += val;
                    }
                }
            }
            for m in 0..ns {
                // (E_c phi) n per component.
                let phin = [
                    [svf[(q, m)] * n.x, 0.0],
                    [0.0, svf[(q, m)] * n.y],
                    [svf[(q, m)] * n.y, svf[(q, m)] * n.x],
                ];
                for c in 0..3 {
                    let row = c * ns + m;
                    for ct in 0..2 {
                        if phin[c][ct] == 0.0 {
                            continue;
                        }
                        for j in 0..ntr {
                            p[(row, col0 + ct * ntr + j)] += w * phin[c][ct] * rho[(q, j)];
                        }
                    }
                }
            }
            for cu in 0..2 {
                for mu in 0..nu {
                    for j in 0..ntr {
                        p[(n_stress + cu * nu + mu, col0 + cu * ntr + j)] -=
                            w * tau * uvf[(q, mu)] * rho[(q, j)];
                    }
                }
            }
            for ct in 0..2 {
                for i in 0..ntr {
                    for j in 0..ntr {
                        h[(col0 + ct * ntr + i, col0 + ct * ntr + j)] +=
                            w * tau * rho[(q, i)] * rho[(q, j)];
                    }
                }
            }
            match cp.load {
                LoadKind::None => {}
                LoadKind::Neumann => {
                    let gn = case.g_n(cp.pts[q], es.side, n);
                    for ct in 0..2 {
                        for j in 0..ntr {
                            g[col0 + ct * ntr + j] += w * gn[ct] * rho[(q, j)];
                        }
                    }
                }
                LoadKind::InterfaceJump => {
                    let gj = case.g_n_gamma(cp.pts[q], n);
                    for ct in 0..2 {
                        for j in 0..ntr {
                            g[col0 + ct * ntr + j] += w * gj[ct] * rho[(q, j)];
                        }
                    }
                }
            }
        }
    }

    LocalParts {
        mt,
        p,
        h,
        r,
        g,
        blocks: couplings.iter().map(|c| c.block).collect(),
    }
}

fn condense_element_side(
    disc: &Discretization,
    case: &ManufacturedCase,
    es_id: usize,
) -> Result<CondensedElement, AssemblyError> {
    let parts = assemble_local_parts(disc, case, es_id);
    let LocalParts {
        mt,
        p,
        h,
        r,
        g,
        blocks,
    } = parts;
    // Static condensation: S = H - P^T M^{-1} P, b = g - P^T M^{-1} r.
    let lu = mt.clone().lu();
    if !lu.is_invertible() {
        return Err(AssemblyError::SingularInterior {
            elem: disc.dofmap.elem_sides[es_id].elem,
        });
    }
    let x = lu.solve(&p).expect("interior solve");
    let mut s = &h - p.transpose() * &x;
    let b = &g - x.transpose() * &r;
    // The Schur complement is symmetric up to roundoff; symmetrize exactly.
    let st = s.transpose();
    s = (s + st) * 0.5;

    Ok(CondensedElement {
        elem_side: es_id,
        blocks,
        mt,
        lu,
        p,
        r,
        s,
        b,
    })
}

/// Integrate a known degree-(2k+2) polynomial over both sides of one cut
/// element and compare against a strongly refined rule; geometry bugs show up
/// here instead of as silent convergence loss.
fn quadrature_self_check(disc: &Discretization, case: &ManufacturedCase) -> Result<(), AssemblyError> {
    let Some(&elem) = disc.class.cut_elems.first() else {
        return Ok(());
    };
    let deg = 2 * disc.dofmap.k + 2;
    let f = |p: Vec2| (0.3 + p.x + 0.7 * p.y).powi(deg as i32);
    let cell = disc.cells[elem].as_ref().expect("cut cell");
    let refined = crate::geometry::cut_element(
        &disc.mesh,
        elem,
        &case.geometry,
        &disc.class,
        disc.quad_degree + 8,
    )
    .map_err(|_| AssemblyError::QuadratureCheck {
        elem,
        coarse: f64::NAN,
        refined: f64::NAN,
    })?;
    for side in Side::all() {
        let coarse: f64 = cell.side_pts[side.index()]
            .iter()
            .zip(&cell.side_wts[side.index()])
            .map(|(p, w)| w * f(*p))
            .sum();
        let fine: f64 = refined.side_pts[side.index()]
            .iter()
            .zip(&refined.side_wts[side.index()])
            .map(|(p, w)| w * f(*p))
            .sum();
        if (coarse - fine).abs() > 1e-9 * fine.abs().max(1.0) {
            return Err(AssemblyError::QuadratureCheck {
                elem,
                coarse,
                refined: fine,
            });
        }
    }
    Ok(())
}
