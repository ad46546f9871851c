//! Interface/boundary geometry: level-set descriptors, element and edge
//! classification against the geometry, and cut-cell quadrature.
//!
//! Sign convention: the region with phi > 0 is side 1 (Omega_1), phi < 0 is
//! side 2 (Omega_2, e.g. the inside of a circle). Interface normals point
//! from side 1 into side 2.

pub mod cut;

pub use cut::{cut_element, interface_rule, CutCell, InterfaceGeom};

use crate::mesh::Mesh;
use crate::Vec2;
use thiserror::Error;

/// Relative tolerance (times the element scale) below which a vertex counts
/// as lying on the geometry.
pub const VERTEX_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("degenerate geometry descriptor: {0}")]
    Degenerate(String),
    #[error("geometry not resolved by the mesh at element {elem}: {reason}")]
    Resolution { elem: usize, reason: String },
    #[error("tangential intersection on edge ({p:?} -> {q:?})")]
    Tangency { p: [f64; 2], q: [f64; 2] },
}

/// Which side of the geometry a point or region lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn from_phi(phi: f64) -> Side {
        if phi > 0.0 {
            Side::One
        } else {
            Side::Two
        }
    }

    pub fn all() -> [Side; 2] {
        [Side::One, Side::Two]
    }
}

/// Interface or unfitted-boundary geometry.
#[derive(Debug, Clone)]
pub enum GeometryDescriptor {
    Circle { center: Vec2, radius: f64 },
    Polyline { points: Vec<Vec2> },
    /// Straight crack segment; `tip` is the distinguished end interior to the
    /// domain. Fully traversed elements are doubled; an element containing
    /// the tip strictly inside keeps a single block.
    Slit { start: Vec2, tip: Vec2 },
}

impl GeometryDescriptor {
    pub fn validate(&self) -> Result<(), GeomError> {
        match self {
            GeometryDescriptor::Circle { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(GeomError::Degenerate("circle radius must be positive".into()));
                }
            }
            GeometryDescriptor::Polyline { points } => {
                if points.len() < 2 {
                    return Err(GeomError::Degenerate("polyline needs at least 2 points".into()));
                }
                for w in points.windows(2) {
                    if (w[1] - w[0]).norm() == 0.0 {
                        return Err(GeomError::Degenerate("degenerate polyline segment".into()));
                    }
                }
            }
            GeometryDescriptor::Slit { start, tip } => {
                if (tip - start).norm() == 0.0 {
                    return Err(GeomError::Degenerate("slit has zero length".into()));
                }
            }
        }
        Ok(())
    }

    /// Level-set value; phi > 0 on side 1, phi < 0 on side 2. For the slit
    /// the value is the signed distance to the supporting line (the extent of
    /// the crack is handled by the classification).
    pub fn phi(&self, p: Vec2) -> f64 {
        match self {
            GeometryDescriptor::Circle { center, radius } => (p - center).norm() - radius,
            GeometryDescriptor::Polyline { points } => {
                let mut best_d2 = f64::INFINITY;
                let mut signed = 0.0;
                for w in points.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let d = b - a;
                    let len2 = d.norm_squared();
                    let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
                    let closest = a + d * t;
                    let d2 = (p - closest).norm_squared();
                    if d2 < best_d2 {
                        best_d2 = d2;
                        let cross = d.x * (p.y - a.y) - d.y * (p.x - a.x);
                        signed = cross.signum() * d2.sqrt();
                        if cross == 0.0 {
                            signed = 0.0;
                        }
                    }
                }
                signed
            }
            GeometryDescriptor::Slit { start, tip } => {
                let d = (tip - start).normalize();
                d.x * (p.y - start.y) - d.y * (p.x - start.x)
            }
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, GeometryDescriptor::Circle { .. })
    }

    pub fn is_slit(&self) -> bool {
        matches!(self, GeometryDescriptor::Slit { .. })
    }
}

/// Per-element classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemTag {
    Interior(Side),
    Cut,
}

/// Per-edge classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeTag {
    Uncut(Side),
    Cut,
    OnInterface,
}

/// Intersection of the geometry with an edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeCut {
    /// Parameter along the edge from v[0] to v[1], in (0, 1).
    pub t: f64,
    pub point: Vec2,
}

/// Result of classifying a mesh against a geometry descriptor.
#[derive(Debug, Clone)]
pub struct Classification {
    pub elem_tags: Vec<ElemTag>,
    pub edge_tags: Vec<EdgeTag>,
    pub edge_cuts: Vec<Option<EdgeCut>>,
    /// Snapped level-set values at vertices (side of the supporting line for
    /// slits).
    pub vertex_phi: Vec<f64>,
    pub cut_elems: Vec<usize>,
    /// Element containing the slit tip strictly inside, when one exists.
    pub tip_element: Option<usize>,
    /// Number of vertices snapped off the geometry.
    pub n_snapped: usize,
}

impl Classification {
    pub fn is_cut(&self, elem: usize) -> bool {
        self.elem_tags[elem] == ElemTag::Cut
    }
}

/// Classify every element and edge of `mesh` against `geom`.
///
/// Fails when the geometry is not resolved by the mesh: an element boundary
/// crossing the interface more than twice or an edge crossed more than once
/// (assumption that each cut element is split into exactly two pieces).
pub fn classify(mesh: &Mesh, geom: &GeometryDescriptor) -> Result<Classification, GeomError> {
    geom.validate()?;
    match geom {
        GeometryDescriptor::Slit { start, tip } => classify_slit(mesh, *start, *tip),
        _ => classify_level_set(mesh, geom),
    }
}

fn classify_level_set(mesh: &Mesh, geom: &GeometryDescriptor) -> Result<Classification, GeomError> {
    let h = mesh.tri_diameter(0);
    let tol = VERTEX_TOL * h;

    let raw: Vec<f64> = mesh.vertices.iter().map(|&v| geom.phi(v)).collect();

    // Edges lying exactly on the geometry become skeleton faces of the
    // interface; their endpoints keep phi = 0 and do not get snapped.
    let mut on_skeleton = vec![false; mesh.vertices.len()];
    let mut on_interface_edge = vec![false; mesh.edges.len()];
    if !geom.is_circle() {
        for (e, ed) in mesh.edges.iter().enumerate() {
            if raw[ed.v[0]].abs() <= tol && raw[ed.v[1]].abs() <= tol {
                on_interface_edge[e] = true;
                on_skeleton[ed.v[0]] = true;
                on_skeleton[ed.v[1]] = true;
            }
        }
    }

    let mut n_snapped = 0;
    let vertex_phi: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(v, &p)| {
            if on_skeleton[v] {
                0.0
            } else if p.abs() < tol {
                n_snapped += 1;
                tol
            } else {
                p
            }
        })
        .collect();

    let mut edge_tags = vec![EdgeTag::Uncut(Side::One); mesh.edges.len()];
    let mut edge_cuts = vec![None; mesh.edges.len()];
    for (e, ed) in mesh.edges.iter().enumerate() {
        if on_interface_edge[e] {
            edge_tags[e] = EdgeTag::OnInterface;
            continue;
        }
        let (p0, p1) = (vertex_phi[ed.v[0]], vertex_phi[ed.v[1]]);
        if p0 * p1 < 0.0 && p0.abs() > 0.0 && p1.abs() > 0.0 {
            let (a, b) = mesh.edge_points(e);
            let cut = intersect_edge(geom, a, b)?.ok_or_else(|| GeomError::Resolution {
                elem: mesh.edges[e].tri_a,
                reason: "sign change without intersection".into(),
            })?;
            let t = if (b - a).x.abs() >= (b - a).y.abs() {
                (cut.x - a.x) / (b - a).x
            } else {
                (cut.y - a.y) / (b - a).y
            };
            edge_tags[e] = EdgeTag::Cut;
            edge_cuts[e] = Some(EdgeCut { t, point: cut });
        } else {
            let s = if p0.abs() > p1.abs() { p0 } else { p1 };
            let s = if s == 0.0 {
                let (a, b) = mesh.edge_points(e);
                geom.phi(0.5 * (a + b))
            } else {
                s
            };
            edge_tags[e] = EdgeTag::Uncut(Side::from_phi(s));
        }
    }

    let mut elem_tags = Vec::with_capacity(mesh.triangles.len());
    let mut cut_elems = Vec::new();
    for t in 0..mesh.triangles.len() {
        let n_cut = mesh.tri_edges[t]
            .iter()
            .filter(|&&e| edge_tags[e] == EdgeTag::Cut)
            .count();
        match n_cut {
            0 => {
                let side = Side::from_phi(geom.phi(mesh.tri_centroid(t)));
                // The geometry may still poke into the element without any
                // vertex sign change; that breaks the two-piece assumption.
                if let GeometryDescriptor::Circle { center, radius } = geom {
                    let [a, b, c] = mesh.tri_vertices(t);
                    let dmin = dist_point_tri(*center, a, b, c);
                    let dmax = (a - center)
                        .norm()
                        .max((b - center).norm())
                        .max((c - center).norm());
                    if dmin < *radius && *radius < dmax {
                        return Err(GeomError::Resolution {
                            elem: t,
                            reason: "interface crosses element without edge sign change; mesh too coarse".into(),
                        });
                    }
                }
                elem_tags.push(ElemTag::Interior(side));
            }
            2 => {
                elem_tags.push(ElemTag::Cut);
                cut_elems.push(t);
            }
            k => {
                return Err(GeomError::Resolution {
                    elem: t,
                    reason: format!("element has {k} cut edges, expected 0 or 2"),
                });
            }
        }
    }

    Ok(Classification {
        elem_tags,
        edge_tags,
        edge_cuts,
        vertex_phi,
        cut_elems,
        tip_element: None,
        n_snapped,
    })
}

fn classify_slit(mesh: &Mesh, start: Vec2, tip: Vec2) -> Result<Classification, GeomError> {
    let h = mesh.tri_diameter(0);
    let tol = VERTEX_TOL * h;
    let geom = GeometryDescriptor::Slit { start, tip };
    let dir = tip - start;
    let len = dir.norm();

    let mut n_snapped = 0;
    let vertex_phi: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|&v| {
            let p = geom.phi(v);
            if p.abs() < tol {
                n_snapped += 1;
                tol
            } else {
                p
            }
        })
        .collect();

    let mut edge_tags = vec![EdgeTag::Uncut(Side::One); mesh.edges.len()];
    let mut edge_cuts = vec![None; mesh.edges.len()];
    for (e, ed) in mesh.edges.iter().enumerate() {
        let (a, b) = mesh.edge_points(e);
        // Parameters of the edge/slit-line crossing: a + t(b-a) = start + u dir.
        if let Some((t, u)) = seg_line_params(a, b, start, dir) {
            // The closed slit [0, 1] cuts the open edge; a crossing exactly at
            // the tip still splits the edge between the two doubled sides.
            if t > 0.0 && t < 1.0 && (-tol / len..=1.0 + tol / len).contains(&u) {
                let point = a + (b - a) * t;
                edge_tags[e] = EdgeTag::Cut;
                edge_cuts[e] = Some(EdgeCut { t, point });
                continue;
            }
        }
        let (p0, p1) = (vertex_phi[ed.v[0]], vertex_phi[ed.v[1]]);
        let s = if p0.abs() > p1.abs() { p0 } else { p1 };
        edge_tags[e] = EdgeTag::Uncut(Side::from_phi(s));
    }

    let mut elem_tags = Vec::with_capacity(mesh.triangles.len());
    let mut cut_elems = Vec::new();
    let mut tip_element = None;
    for t in 0..mesh.triangles.len() {
        let verts = mesh.tri_vertices(t);
        let (u0, u1) = clip_segment_to_tri(start, dir, verts);
        let cut_len = (u1 - u0).max(0.0) * len;
        if cut_len <= tol {
            let cen = mesh.tri_centroid(t);
            elem_tags.push(ElemTag::Interior(Side::from_phi(geom.phi(cen))));
            continue;
        }
        let tip_inside = u1 >= 1.0 - tol / len && !on_tri_boundary(tip, verts, tol);
        if tip_inside {
            // Tip element: the crack terminates strictly inside; the element
            // keeps a single polynomial block and the interior slit
            // sub-segment carries no skeleton face.
            tip_element = Some(t);
            elem_tags.push(ElemTag::Interior(Side::One));
            continue;
        }
        elem_tags.push(ElemTag::Cut);
        cut_elems.push(t);
    }

    // Fully traversed elements must have exactly two cut edges.
    for &t in &cut_elems {
        let n_cut = mesh.tri_edges[t]
            .iter()
            .filter(|&&e| edge_tags[e] == EdgeTag::Cut)
            .count();
        if n_cut != 2 {
            return Err(GeomError::Resolution {
                elem: t,
                reason: format!("slit element has {n_cut} cut edges, expected 2"),
            });
        }
    }

    Ok(Classification {
        elem_tags,
        edge_tags,
        edge_cuts,
        vertex_phi,
        cut_elems,
        tip_element,
        n_snapped,
    })
}

/// Intersection point of the geometry with the segment p -> q, if any.
///
/// Circles use the closed-form quadratic root (no iteration); polylines and
/// slits use exact segment-segment intersection.
pub fn intersect_edge(
    geom: &GeometryDescriptor,
    p: Vec2,
    q: Vec2,
) -> Result<Option<Vec2>, GeomError> {
    match geom {
        GeometryDescriptor::Circle { center, radius } => {
            let d = q - p;
            let m = p - center;
            let a = d.norm_squared();
            let b = 2.0 * m.dot(&d);
            let c = m.norm_squared() - radius * radius;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return Ok(None);
            }
            let sq = disc.sqrt();
            // Numerically stable pair of roots.
            let q0 = -0.5 * (b + b.signum() * sq);
            let (t1, t2) = if q0 == 0.0 {
                (0.0, 0.0)
            } else {
                (q0 / a, c / q0)
            };
            let inside = |t: f64| (0.0..=1.0).contains(&t);
            let roots: Vec<f64> = [t1, t2]
                .into_iter()
                .filter(|t| inside(*t))
                .collect();
            match roots.len() {
                0 => Ok(None),
                1 => Ok(Some(p + d * roots[0])),
                _ => {
                    if (roots[0] - roots[1]).abs() < 1e-12 {
                        Err(GeomError::Tangency {
                            p: [p.x, p.y],
                            q: [q.x, q.y],
                        })
                    } else {
                        // A double transversal crossing of one edge violates
                        // the resolution assumption.
                        Err(GeomError::Resolution {
                            elem: usize::MAX,
                            reason: "edge crossed twice by the circle".into(),
                        })
                    }
                }
            }
        }
        GeometryDescriptor::Polyline { points } => {
            for w in points.windows(2) {
                if let Some((t, u)) = seg_line_params(p, q, w[0], w[1] - w[0]) {
                    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                        return Ok(Some(p + (q - p) * t));
                    }
                }
            }
            Ok(None)
        }
        GeometryDescriptor::Slit { start, tip } => {
            if let Some((t, u)) = seg_line_params(p, q, *start, tip - start) {
                if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                    return Ok(Some(p + (q - p) * t));
                }
            }
            Ok(None)
        }
    }
}

/// Parameters (t, u) with p + t(q-p) = a + u d, or None for parallel lines.
fn seg_line_params(p: Vec2, q: Vec2, a: Vec2, d: Vec2) -> Option<(f64, f64)> {
    let e = q - p;
    let denom = e.x * d.y - e.y * d.x;
    if denom.abs() < 1e-300 {
        return None;
    }
    let w = a - p;
    let t = (w.x * d.y - w.y * d.x) / denom;
    let u = (w.x * e.y - w.y * e.x) / denom;
    Some((t, u))
}

/// Clip the parametrized segment a + u d (u in [0,1]) to a triangle; returns
/// the parameter interval inside (empty when u0 >= u1).
fn clip_segment_to_tri(a: Vec2, d: Vec2, verts: [Vec2; 3]) -> (f64, f64) {
    let mut u0: f64 = 0.0;
    let mut u1: f64 = 1.0;
    for s in 0..3 {
        let (va, vb) = (verts[s], verts[(s + 1) % 3]);
        // Inside of a ccw triangle is the left side of each directed edge.
        let n = Vec2::new(-(vb.y - va.y), vb.x - va.x);
        let num = n.dot(&(a - va));
        let den = n.dot(&d);
        if den.abs() < 1e-300 {
            if num < 0.0 {
                return (1.0, 0.0);
            }
            continue;
        }
        let u = -num / den;
        if den > 0.0 {
            u0 = u0.max(u);
        } else {
            u1 = u1.min(u);
        }
    }
    (u0, u1)
}

fn on_tri_boundary(p: Vec2, verts: [Vec2; 3], tol: f64) -> bool {
    for s in 0..3 {
        let (a, b) = (verts[s], verts[(s + 1) % 3]);
        let d = b - a;
        let len2 = d.norm_squared();
        let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
        if (p - (a + d * t)).norm() <= tol {
            return true;
        }
    }
    false
}

/// Minimum distance from `p` to the closed triangle (zero if inside).
fn dist_point_tri(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let cross = |u: Vec2, v: Vec2, w: Vec2| (v.x - u.x) * (w.y - u.y) - (v.y - u.y) * (w.x - u.x);
    if cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0 {
        return 0.0;
    }
    let seg = |u: Vec2, v: Vec2| {
        let d = v - u;
        let t = ((p - u).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (p - (u + d * t)).norm()
    };
    seg(a, b).min(seg(b, c)).min(seg(c, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, Rect};

    fn circle_41() -> GeometryDescriptor {
        GeometryDescriptor::Circle {
            center: Vec2::new(0.5, 0.5),
            radius: (3.0f64 / 64.0).sqrt(),
        }
    }

    #[test]
    fn intersect_vertical_line() {
        let geom = GeometryDescriptor::Polyline {
            points: vec![Vec2::new(0.5, -1.0), Vec2::new(0.5, 2.0)],
        };
        let hit = intersect_edge(&geom, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0))
            .unwrap()
            .unwrap();
        assert!((hit - Vec2::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn intersect_circle_radius_hit() {
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        };
        let hit = intersect_edge(&geom, Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0))
            .unwrap()
            .unwrap();
        assert!((hit - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn intersect_circle_consistency() {
        // Edge of the 8x8 mesh crossed by the Example-4.1 circle; the
        // intersection must satisfy both the edge equation and |x - c| = r.
        // (At y = 5/8 the circle crosses between x = 5/8 and x = 3/4:
        // distances^2 from the center are 2/64 < 3/64 < 5/64.)
        let geom = circle_41();
        let p = Vec2::new(0.625, 0.625);
        let q = Vec2::new(0.75, 0.625);
        let hit = intersect_edge(&geom, p, q).unwrap().unwrap();
        assert!((hit.y - 0.625).abs() < 1e-15, "stays on the edge");
        assert!(
            ((hit - Vec2::new(0.5, 0.5)).norm() - (3.0f64 / 64.0).sqrt()).abs() < 1e-12,
            "lies on the circle"
        );
        assert!(hit.x >= 0.625 && hit.x <= 0.75);
    }

    #[test]
    fn tangency_reported() {
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.0, 0.0),
            radius: 1.0,
        };
        let r = intersect_edge(&geom, Vec2::new(-2.0, 1.0), Vec2::new(2.0, 1.0));
        assert!(matches!(r, Err(GeomError::Tangency { .. })));
    }

    #[test]
    fn classify_matches_sampling_oracle() {
        // Brute-force oracle: sample each element densely; an element is cut
        // iff both signs appear among the samples.
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        let geom = circle_41();
        let class = classify(&mesh, &geom).unwrap();
        let m = 40;
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.tri_vertices(t);
            let mut pos = false;
            let mut neg = false;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let l1 = i as f64 / m as f64;
                    let l2 = j as f64 / m as f64;
                    let p = a * (1.0 - l1 - l2) + b * l1 + c * l2;
                    let phi = geom.phi(p);
                    pos |= phi > 0.0;
                    neg |= phi < 0.0;
                }
            }
            let oracle_cut = pos && neg;
            assert_eq!(
                class.is_cut(t),
                oracle_cut,
                "element {t}: classify vs sampling oracle"
            );
            if !oracle_cut {
                let want = if neg { Side::Two } else { Side::One };
                assert_eq!(class.elem_tags[t], ElemTag::Interior(want));
            }
        }
        assert!(!class.cut_elems.is_empty());
    }

    #[test]
    fn aligned_line_yields_on_interface_edges() {
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Polyline {
            points: vec![Vec2::new(0.5, 0.0), Vec2::new(0.5, 1.0)],
        };
        let class = classify(&mesh, &geom).unwrap();
        assert!(class.cut_elems.is_empty(), "no cut elements");
        let mut n_on = 0;
        for (e, tag) in class.edge_tags.iter().enumerate() {
            let (p, q) = mesh.edge_points(e);
            let on_line = (p.x - 0.5).abs() < 1e-14 && (q.x - 0.5).abs() < 1e-14;
            assert_eq!(*tag == EdgeTag::OnInterface, on_line, "edge {e}");
            n_on += (*tag == EdgeTag::OnInterface) as usize;
        }
        assert_eq!(n_on, 8);
        // Elements on the left are side 1 (phi > 0 for this orientation),
        // right side 2.
        for t in 0..mesh.triangles.len() {
            let cen = mesh.tri_centroid(t);
            let want = if cen.x < 0.5 { Side::One } else { Side::Two };
            assert_eq!(class.elem_tags[t], ElemTag::Interior(want));
        }
    }

    #[test]
    fn coarse_mesh_resolution_violation() {
        // A small circle inside one element: no vertex sign change, but the
        // interface crosses the element.
        let mesh = build_uniform_mesh(2, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.3, 0.15),
            radius: 0.08,
        };
        let r = classify(&mesh, &geom);
        assert!(matches!(r, Err(GeomError::Resolution { .. })));
    }

    #[test]
    fn slit_classification_on_odd_mesh() {
        // Example-4.4 geometry: the tip (1/2, 1/2) is the center of the
        // middle cell and lies exactly on its diagonal edge, so every
        // intersected element is fully traversed and doubled.
        let mesh = build_uniform_mesh(9, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Slit {
            start: Vec2::new(0.0, 0.5),
            tip: Vec2::new(0.5, 0.5),
        };
        let class = classify(&mesh, &geom).unwrap();
        assert!(class.tip_element.is_none());
        for &t in &class.cut_elems {
            let [a, b, c] = mesh.tri_vertices(t);
            let xmin = a.x.min(b.x).min(c.x);
            let ymin = a.y.min(b.y).min(c.y);
            let ymax = a.y.max(b.y).max(c.y);
            assert!(xmin < 0.5 && ymin < 0.5 && ymax > 0.5, "element {t} intersects the slit");
        }
        // 4 full columns of 2 triangles plus the entered half of the middle
        // cell: the slit crosses both triangles of columns 0..4 at y = 1/2
        // except the middle cell where only the upper-left triangle is hit.
        assert_eq!(class.cut_elems.len(), 9);
        // Boundary edge at x = 0 containing (0, 1/2) is split.
        let mut found_boundary_cut = false;
        for (e, tag) in class.edge_tags.iter().enumerate() {
            if *tag != EdgeTag::Cut {
                continue;
            }
            let (p, q) = mesh.edge_points(e);
            if p.x.abs() < 1e-14 && q.x.abs() < 1e-14 {
                found_boundary_cut = true;
                let cut = class.edge_cuts[e].unwrap();
                assert!((cut.point.y - 0.5).abs() < 1e-14);
            }
        }
        assert!(found_boundary_cut);
    }

    #[test]
    fn slit_tip_strictly_inside_an_element() {
        let mesh = build_uniform_mesh(5, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Slit {
            start: Vec2::new(0.0, 0.5),
            tip: Vec2::new(0.47, 0.5),
        };
        let class = classify(&mesh, &geom).unwrap();
        let tip = class.tip_element.expect("tip element identified");
        assert!(mesh.tri_contains(tip, Vec2::new(0.47, 0.5), 1e-14));
        assert!(!class.is_cut(tip), "tip element is not doubled");
        // The element the slit fully traverses right before the tip is cut.
        assert!(!class.cut_elems.is_empty());
    }
}
