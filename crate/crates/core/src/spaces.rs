//! Degree-of-freedom maps for the X-HDG trace spaces.
//!
//! Interior unknowns live per element side: a symmetric-tensor stress block
//! of degree k-1 and a vector displacement block of degree k, doubled on cut
//! elements. Skeleton unknowns live in trace blocks of 2(k+1) dofs (two
//! components in the dominant-coordinate segment basis): one per uncut edge,
//! one per side portion of a cut edge, one per interface/boundary face of a
//! cut element (shared across sides for interface problems, per side for
//! crack faces). Dirichlet blocks are constrained by local L2 mass solves
//! and fold into the right-hand side at condensation time.

use crate::basis::{dim_p2, SegBasis};
use crate::geometry::{
    classify, cut_element, interface_rule, Classification, CutCell, EdgeTag, ElemTag, GeomError,
    Side,
};
use crate::mesh::{build_uniform_mesh, Mesh, MeshError};
use crate::problems::{BcKind, ManufacturedCase, Scheme};
use crate::projection::gram_from_values;
use crate::quadrature::{map_seg_rule, segment_rule};
use crate::{DMatrix, DVector, Vec2};
use thiserror::Error;

/// Edge portions shorter than this fraction of the edge carry no trace block.
pub const PORTION_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("polynomial degree k must be at least 1")]
    DegreeZero,
    #[error("no Dirichlet boundary: pure Neumann configurations are rejected")]
    PureNeumann,
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One interior polynomial block: an element, or one side of a cut element.
#[derive(Debug, Clone, Copy)]
pub struct ElemSide {
    pub elem: usize,
    pub side: Side,
}

/// Geometric support of a trace block.
#[derive(Debug, Clone, Copy)]
pub enum BlockSupport {
    /// Sub-interval [t0, t1] of a mesh edge. `side` is None for whole uncut
    /// edges and on-interface edges, Some for the portions of a cut edge.
    Edge {
        edge: usize,
        side: Option<Side>,
        t0: f64,
        t1: f64,
        on_interface: bool,
    },
    /// Interface or unfitted-boundary face of a cut element; `side` is None
    /// for the single-valued interface trace, Some for per-side crack faces.
    CutFace { elem: usize, side: Option<Side> },
}

#[derive(Debug, Clone)]
pub enum BlockStatus {
    Free { offset: usize },
    /// Dirichlet block; values are the 2(k+1) constrained coefficients
    /// (filled by [`constrain_dirichlet`]).
    Fixed { values: DVector<f64> },
}

#[derive(Debug, Clone)]
pub struct TraceBlock {
    pub support: BlockSupport,
    pub basis: SegBasis,
    pub status: BlockStatus,
    /// Free boundary block that receives a surface-traction load.
    pub neumann: bool,
}

/// Numbering of interior and skeleton unknowns.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub k: usize,
    pub scheme: Scheme,
    pub elem_sides: Vec<ElemSide>,
    /// Element -> its element-side ids (empty for inactive elements).
    pub sides_of_elem: Vec<Vec<usize>>,
    pub blocks: Vec<TraceBlock>,
    pub blocks_of_edge: Vec<Vec<usize>>,
    /// Element -> interface/boundary face block ids (cut elements only).
    pub face_blocks_of_elem: Vec<Vec<usize>>,
    /// Total number of free trace dofs.
    pub n_free: usize,
}

impl DofMap {
    /// Scalar stress functions per element side (3 tensor components).
    pub fn stress_dofs(&self) -> usize {
        3 * dim_p2(self.k - 1)
    }

    /// Vector displacement dofs per element side.
    pub fn disp_dofs(&self) -> usize {
        2 * dim_p2(self.k)
    }

    pub fn interior_dofs_per_side(&self) -> usize {
        self.stress_dofs() + self.disp_dofs()
    }

    /// Dofs per trace block: two components, k+1 functions each.
    pub fn block_dofs(&self) -> usize {
        2 * (self.k + 1)
    }

    pub fn total_interior_dofs(&self) -> usize {
        self.elem_sides.len() * self.interior_dofs_per_side()
    }

    pub fn free_offset(&self, block: usize) -> Option<usize> {
        match self.blocks[block].status {
            BlockStatus::Free { offset } => Some(offset),
            BlockStatus::Fixed { .. } => None,
        }
    }
}

/// Everything downstream of classification for one (case, mesh, k) triple.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub class: Classification,
    /// Cut geometry per cut element (None elsewhere), built at the assembly
    /// quadrature degree.
    pub cells: Vec<Option<CutCell>>,
    pub dofmap: DofMap,
    pub quad_degree: usize,
}

/// Volume/face quadrature degree used by assembly: exact for every scheme
/// integrand at degree k plus the polynomial data of the catalogued cases.
pub fn assembly_degree(k: usize) -> usize {
    (2 * k + 2).max(k + 7)
}

/// Build mesh, classification, cut cells, dof map and Dirichlet values.
pub fn discretize(
    case: &ManufacturedCase,
    n: usize,
    k: usize,
) -> Result<Discretization, SpaceError> {
    let mesh = build_uniform_mesh(n, case.bbox)?;
    let class = classify(&mesh, &case.geometry)?;
    let degree = assembly_degree(k);
    let mut cells = vec![None; mesh.triangles.len()];
    for &t in &class.cut_elems {
        cells[t] = Some(cut_element(&mesh, t, &case.geometry, &class, degree)?);
    }
    let mut dofmap = build_dofmap(&mesh, &class, &cells, case, k)?;
    constrain_dirichlet(&mut dofmap, &mesh, &class, &cells, case, degree);
    Ok(Discretization {
        mesh,
        class,
        cells,
        dofmap,
        quad_degree: degree,
    })
}

/// Build the dof map: element-side blocks and trace blocks with deterministic
/// numbering (elements then edges then cut faces, ascending ids).
pub fn build_dofmap(
    mesh: &Mesh,
    class: &Classification,
    cells: &[Option<CutCell>],
    case: &ManufacturedCase,
    k: usize,
) -> Result<DofMap, SpaceError> {
    if k == 0 {
        return Err(SpaceError::DegreeZero);
    }
    let active = case.active;

    let mut elem_sides = Vec::new();
    let mut sides_of_elem = vec![Vec::new(); mesh.triangles.len()];
    for t in 0..mesh.triangles.len() {
        match class.elem_tags[t] {
            ElemTag::Interior(side) => {
                if active[side.index()] {
                    sides_of_elem[t].push(elem_sides.len());
                    elem_sides.push(ElemSide { elem: t, side });
                }
            }
            ElemTag::Cut => {
                for side in Side::all() {
                    if active[side.index()] {
                        sides_of_elem[t].push(elem_sides.len());
                        elem_sides.push(ElemSide { elem: t, side });
                    }
                }
            }
        }
    }

    let mut blocks: Vec<TraceBlock> = Vec::new();
    let mut blocks_of_edge = vec![Vec::new(); mesh.edges.len()];
    let mut push_edge_block = |blocks: &mut Vec<TraceBlock>,
                               blocks_of_edge: &mut Vec<Vec<usize>>,
                               edge: usize,
                               side: Option<Side>,
                               t0: f64,
                               t1: f64,
                               on_interface: bool,
                               status: BlockStatus,
                               neumann: bool| {
        let (p, q) = mesh.edge_points(edge);
        let a = p + (q - p) * t0;
        let b = p + (q - p) * t1;
        blocks_of_edge[edge].push(blocks.len());
        blocks.push(TraceBlock {
            support: BlockSupport::Edge {
                edge,
                side,
                t0,
                t1,
                on_interface,
            },
            basis: SegBasis::from_endpoints(k, a, b),
            status,
            neumann,
        });
    };

    for (e, ed) in mesh.edges.iter().enumerate() {
        let (p, q) = mesh.edge_points(e);
        let boundary_bc = if ed.is_boundary() {
            Some(case.boundary_bc(0.5 * (p + q)))
        } else {
            None
        };
        let status_for = |bc: Option<BcKind>| match bc {
            Some(BcKind::Dirichlet) => BlockStatus::Fixed {
                values: DVector::zeros(0),
            },
            _ => BlockStatus::Free { offset: usize::MAX },
        };
        match class.edge_tags[e] {
            EdgeTag::Uncut(side) => {
                if active[side.index()] {
                    push_edge_block(
                        &mut blocks,
                        &mut blocks_of_edge,
                        e,
                        None,
                        0.0,
                        1.0,
                        false,
                        status_for(boundary_bc),
                        boundary_bc == Some(BcKind::Neumann),
                    );
                }
            }
            EdgeTag::OnInterface => {
                // Skeleton face of the interface partition: single-valued
                // trace, traction-jump load.
                push_edge_block(
                    &mut blocks,
                    &mut blocks_of_edge,
                    e,
                    None,
                    0.0,
                    1.0,
                    true,
                    status_for(boundary_bc),
                    false,
                );
            }
            EdgeTag::Cut => {
                let cut = class.edge_cuts[e].expect("cut edge without intersection");
                let side0 = Side::from_phi(class.vertex_phi[ed.v[0]]);
                for (side, t0, t1) in [(side0, 0.0, cut.t), (side0.other(), cut.t, 1.0)] {
                    if !active[side.index()] {
                        continue;
                    }
                    if (t1 - t0) * mesh.edge_length(e) < PORTION_DROP_TOL * mesh.edge_length(e) {
                        continue;
                    }
                    push_edge_block(
                        &mut blocks,
                        &mut blocks_of_edge,
                        e,
                        Some(side),
                        t0,
                        t1,
                        false,
                        status_for(boundary_bc),
                        boundary_bc == Some(BcKind::Neumann),
                    );
                }
            }
        }
    }

    let mut face_blocks_of_elem = vec![Vec::new(); mesh.triangles.len()];
    for &t in &class.cut_elems {
        let cell = cells[t].as_ref().expect("missing cut cell");
        let chord_basis = SegBasis::from_endpoints(k, cell.chord.0, cell.chord.1);
        match case.scheme {
            Scheme::Interface => {
                face_blocks_of_elem[t].push(blocks.len());
                blocks.push(TraceBlock {
                    support: BlockSupport::CutFace { elem: t, side: None },
                    basis: chord_basis,
                    status: BlockStatus::Free { offset: usize::MAX },
                    neumann: false,
                });
            }
            Scheme::Unfitted => {
                let status = || match case.unfitted_face_bc {
                    BcKind::Dirichlet => BlockStatus::Fixed {
                        values: DVector::zeros(0),
                    },
                    BcKind::Neumann => BlockStatus::Free { offset: usize::MAX },
                };
                let neumann = case.unfitted_face_bc == BcKind::Neumann;
                for side in Side::all() {
                    if active[side.index()] {
                        face_blocks_of_elem[t].push(blocks.len());
                        blocks.push(TraceBlock {
                            support: BlockSupport::CutFace {
                                elem: t,
                                side: Some(side),
                            },
                            basis: chord_basis.clone(),
                            status: status(),
                            neumann,
                        });
                    }
                }
            }
        }
    }

    // Assign free offsets in block order.
    let block_dofs = 2 * (k + 1);
    let mut n_free = 0;
    let mut any_fixed = false;
    for b in blocks.iter_mut() {
        match &mut b.status {
            BlockStatus::Free { offset } => {
                *offset = n_free;
                n_free += block_dofs;
            }
            BlockStatus::Fixed { .. } => any_fixed = true,
        }
    }
    if !any_fixed {
        return Err(SpaceError::PureNeumann);
    }

    Ok(DofMap {
        k,
        scheme: case.scheme,
        elem_sides,
        sides_of_elem,
        blocks,
        blocks_of_edge,
        face_blocks_of_elem,
        n_free,
    })
}

/// Quadrature rule (points, weights) over a trace block's support.
pub fn block_rule(
    block: &TraceBlock,
    mesh: &Mesh,
    cells: &[Option<CutCell>],
    degree: usize,
) -> (Vec<Vec2>, Vec<f64>) {
    match block.support {
        BlockSupport::Edge { edge, t0, t1, .. } => {
            let (p, q) = mesh.edge_points(edge);
            let rule = segment_rule(degree).expect("segment rule");
            map_seg_rule(&rule, p + (q - p) * t0, p + (q - p) * t1)
        }
        BlockSupport::CutFace { elem, .. } => {
            let cell = cells[elem].as_ref().expect("cut face on uncut element");
            let (pts, wts, _) = interface_rule(cell, degree);
            (pts, wts)
        }
    }
}

/// Fill the constrained values of all Dirichlet blocks: each block solves its
/// local mass system against g_D in its own basis over its own support, per
/// component (for straight faces this is the per-side L2 projection, for
/// curved faces the trace mass solve).
pub fn constrain_dirichlet(
    dofmap: &mut DofMap,
    mesh: &Mesh,
    class: &Classification,
    cells: &[Option<CutCell>],
    case: &ManufacturedCase,
    degree: usize,
) {
    let nb = dofmap.k + 1;
    for b in 0..dofmap.blocks.len() {
        if !matches!(dofmap.blocks[b].status, BlockStatus::Fixed { .. }) {
            continue;
        }
        let (pts, wts) = block_rule(&dofmap.blocks[b], mesh, cells, degree);
        let side = block_eval_side(&dofmap.blocks[b], class);
        let vals = dofmap.blocks[b].basis.eval(&pts);
        let gram = gram_from_values(&vals, &wts);
        let lu = gram.lu();
        let mut coeffs = DVector::zeros(2 * nb);
        for comp in 0..2 {
            let mut rhs = DVector::zeros(nb);
            for (q, &w) in wts.iter().enumerate() {
                let g = case.g_d(pts[q], side);
                for i in 0..nb {
                    rhs[i] += w * g[comp] * vals[(q, i)];
                }
            }
            let c = lu.solve(&rhs).expect("singular Dirichlet mass matrix");
            for i in 0..nb {
                coeffs[comp * nb + i] = c[i];
            }
        }
        dofmap.blocks[b].status = BlockStatus::Fixed { values: coeffs };
    }
}

/// Side used to evaluate case data on a block's support.
pub fn block_eval_side(block: &TraceBlock, class: &Classification) -> Side {
    match block.support {
        BlockSupport::Edge { side, edge, .. } => side.unwrap_or(match class.edge_tags[edge] {
            EdgeTag::Uncut(s) => s,
            _ => Side::One,
        }),
        BlockSupport::CutFace { side, .. } => side.unwrap_or(Side::One),
    }
}

/// Evaluate a trace block's vector values at points, from coefficient slice
/// (layout: [comp0 x (k+1), comp1 x (k+1)]).
pub fn eval_block(block: &TraceBlock, coeffs: &[f64], pts: &[Vec2]) -> Vec<[f64; 2]> {
    let vals = block.basis.eval(pts);
    let nb = vals.ncols();
    pts.iter()
        .enumerate()
        .map(|(q, _)| {
            let mut out = [0.0; 2];
            for comp in 0..2 {
                for i in 0..nb {
                    out[comp] += coeffs[comp * nb + i] * vals[(q, i)];
                }
            }
            out
        })
        .collect()
}

/// Dense evaluation matrix of a block at quadrature points (rows = points,
/// cols = k+1 scalar functions).
pub fn block_values(block: &TraceBlock, pts: &[Vec2]) -> DMatrix<f64> {
    block.basis.eval(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{linear_patch_case, make_case, CaseParams};

    fn circle_interface(n: usize, k: usize) -> Discretization {
        let case = make_case("circle-interface", CaseParams::default()).unwrap();
        discretize(&case, n, k).unwrap()
    }

    #[test]
    fn interior_dof_counts() {
        let disc = circle_interface(8, 1);
        assert_eq!(disc.dofmap.interior_dofs_per_side(), 9); // 3 + 6
        let disc2 = circle_interface(8, 2);
        assert_eq!(disc2.dofmap.interior_dofs_per_side(), 21); // 9 + 12
        // Cut elements own two sides: 42 dofs at k = 2.
        let t = disc2.class.cut_elems[0];
        assert_eq!(disc2.dofmap.sides_of_elem[t].len(), 2);
        assert_eq!(disc2.dofmap.block_dofs(), 6);
        // Interface trace block at k = 1 has 4 dofs.
        assert_eq!(disc.dofmap.block_dofs(), 4);
    }

    #[test]
    fn uncut_mesh_reduces_to_standard_hdg_count() {
        // A geometry that cuts nothing: every edge keeps a single trace
        // block; with an all-Dirichlet boundary the free dofs are exactly
        // 2(k+1) x (#interior edges).
        let case = linear_patch_case(crate::problems::Scheme::Interface, false);
        let mut far = case.clone();
        far.geometry = crate::geometry::GeometryDescriptor::Circle {
            center: Vec2::new(50.0, 50.0),
            radius: 0.1,
        };
        let n = 6;
        let disc = discretize(&far, n, 1).unwrap();
        let interior_edges = 3 * n * n - 2 * n;
        assert_eq!(disc.dofmap.n_free, 4 * interior_edges);
        assert!(disc.class.cut_elems.is_empty());
    }

    #[test]
    fn cut_edges_get_two_side_blocks() {
        let disc = circle_interface(8, 1);
        let mut saw_cut_edge = false;
        for (e, tag) in disc.class.edge_tags.iter().enumerate() {
            if *tag == EdgeTag::Cut {
                saw_cut_edge = true;
                assert_eq!(disc.dofmap.blocks_of_edge[e].len(), 2, "edge {e}");
            }
        }
        assert!(saw_cut_edge);
        for &t in &disc.class.cut_elems {
            assert_eq!(disc.dofmap.face_blocks_of_elem[t].len(), 1);
        }
    }

    #[test]
    fn unfitted_scheme_drops_outside_dofs() {
        let case = make_case("circle-domain", CaseParams::default()).unwrap();
        let disc = discretize(&case, 8, 1).unwrap();
        for t in 0..disc.mesh.triangles.len() {
            match disc.class.elem_tags[t] {
                ElemTag::Interior(Side::One) => {
                    assert!(disc.dofmap.sides_of_elem[t].is_empty(), "outside element {t}")
                }
                ElemTag::Interior(Side::Two) => {
                    assert_eq!(disc.dofmap.sides_of_elem[t].len(), 1)
                }
                ElemTag::Cut => assert_eq!(disc.dofmap.sides_of_elem[t].len(), 1),
            }
        }
        // Every cut element carries exactly one Dirichlet boundary face.
        for &t in &disc.class.cut_elems {
            assert_eq!(disc.dofmap.face_blocks_of_elem[t].len(), 1);
            let b = disc.dofmap.face_blocks_of_elem[t][0];
            assert!(matches!(
                disc.dofmap.blocks[b].status,
                BlockStatus::Fixed { .. }
            ));
        }
    }

    #[test]
    fn crack_slit_faces_are_per_side_neumann() {
        let case = make_case("crack-tip", CaseParams::default()).unwrap();
        let disc = discretize(&case, 9, 1).unwrap();
        for &t in &disc.class.cut_elems {
            let fb = &disc.dofmap.face_blocks_of_elem[t];
            assert_eq!(fb.len(), 2, "two crack faces on element {t}");
            for &b in fb {
                let block = &disc.dofmap.blocks[b];
                assert!(block.neumann);
                assert!(matches!(block.status, BlockStatus::Free { .. }));
            }
        }
    }

    #[test]
    fn rejects_k_zero() {
        let case = make_case("circle-interface", CaseParams::default()).unwrap();
        let mesh = build_uniform_mesh(4, case.bbox).unwrap();
        let class = classify(&mesh, &case.geometry).unwrap();
        let cells = vec![None; mesh.triangles.len()];
        // k = 0 violates well-posedness and is refused outright.
        assert!(matches!(
            build_dofmap(&mesh, &class, &cells, &case, 0),
            Err(SpaceError::DegreeZero)
        ));
    }

    #[test]
    fn zero_dirichlet_data_gives_zero_values() {
        let case = crate::problems::zero_case();
        let disc = discretize(&case, 4, 1).unwrap();
        for b in &disc.dofmap.blocks {
            if let BlockStatus::Fixed { values } = &b.status {
                assert!(values.iter().all(|v| v.abs() == 0.0));
            }
        }
    }

    #[test]
    fn linear_dirichlet_data_reproduced_at_quadrature_points() {
        let case = linear_patch_case(crate::problems::Scheme::Interface, false);
        let disc = discretize(&case, 6, 1).unwrap();
        for b in &disc.dofmap.blocks {
            if let BlockStatus::Fixed { values } = &b.status {
                let (pts, _) = block_rule(b, &disc.mesh, &disc.cells, 6);
                let vals = eval_block(b, values.as_slice(), &pts);
                for (q, p) in pts.iter().enumerate() {
                    let g = case.g_d(*p, Side::One);
                    assert!((vals[q][0] - g[0]).abs() < 1e-11);
                    assert!((vals[q][1] - g[1]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn curved_dirichlet_residual_vanishes() {
        // Boundary-unfitted circle: the constrained values solve
        // <u_tilde - g_D, mu*>_F = 0 for all k+1 test functions.
        let case = make_case("circle-domain", CaseParams::default()).unwrap();
        let disc = discretize(&case, 8, 2).unwrap();
        let nb = disc.dofmap.k + 1;
        let mut checked = 0;
        for b in &disc.dofmap.blocks {
            let BlockStatus::Fixed { values } = &b.status else {
                continue;
            };
            let BlockSupport::CutFace { .. } = b.support else {
                continue;
            };
            let (pts, wts) = block_rule(b, &disc.mesh, &disc.cells, disc.quad_degree);
            let vals = b.basis.eval(&pts);
            for comp in 0..2 {
                for i in 0..nb {
                    let mut moment = 0.0;
                    for (q, &w) in wts.iter().enumerate() {
                        let g = case.g_d(pts[q], Side::Two);
                        let mut tr = 0.0;
                        for j in 0..nb {
                            tr += values[comp * nb + j] * vals[(q, j)];
                        }
                        moment += w * (tr - g[comp]) * vals[(q, i)];
                    }
                    assert!(
                        moment.abs() < 1e-11,
                        "curved Dirichlet residual comp {comp} fn {i}: {moment}"
                    );
                }
            }
            checked += 1;
        }
        assert!(checked > 0);
    }
}
