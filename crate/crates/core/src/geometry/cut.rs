//! Cut-cell quadrature: per-element side regions and interface rules.
//!
//! A cut element is split by its chord (the segment joining the two edge
//! intersections) into two convex polygons, fan-triangulated and integrated
//! with mapped reference rules. For circular geometry the region between the
//! chord and the exact arc is covered by a blended patch whose curved edge is
//! the arc itself; its contribution is added to the inside region and
//! subtracted from the outside one, so both side rules integrate over the
//! exact curved sub-regions.

use super::{Classification, GeomError, GeometryDescriptor, Side};
use crate::mesh::Mesh;
use crate::quadrature::{gauss_unit, map_tri_rule, triangle_rule};
use crate::Vec2;

/// Geometry of the interface portion inside one element.
#[derive(Debug, Clone)]
pub enum InterfaceGeom {
    /// Exact circular arc from angle `a0` to `a1` (short way around).
    Arc {
        center: Vec2,
        radius: f64,
        a0: f64,
        a1: f64,
    },
    /// Straight segment with unit normal `normal` pointing from side 1 into
    /// side 2.
    Segment { p: Vec2, q: Vec2, normal: Vec2 },
}

/// Quadrature-ready cut geometry of a single element.
#[derive(Debug, Clone)]
pub struct CutCell {
    pub elem: usize,
    /// Area rule per side; weights may be negative on curved-patch points
    /// that are subtracted from the straight polygon.
    pub side_pts: [Vec<Vec2>; 2],
    pub side_wts: [Vec<f64>; 2],
    /// Edge intersection points bounding the interface portion.
    pub chord: (Vec2, Vec2),
    pub iface: InterfaceGeom,
}

impl CutCell {
    pub fn side_area(&self, side: Side) -> f64 {
        self.side_wts[side.index()].iter().sum()
    }

    pub fn chord_length(&self) -> f64 {
        (self.chord.1 - self.chord.0).norm()
    }
}

const MIN_CURVED_POINTS: usize = 8;

/// Build the cut geometry of element `elem` with area rules exact (up to
/// curved-map truncation far below solver tolerances) for integrands of
/// polynomial degree `degree`.
pub fn cut_element(
    mesh: &Mesh,
    elem: usize,
    geom: &GeometryDescriptor,
    class: &Classification,
    degree: usize,
) -> Result<CutCell, GeomError> {
    let tri = mesh.triangles[elem];
    let cut_edges: Vec<(usize, Vec2)> = mesh.tri_edges[elem]
        .iter()
        .filter_map(|&e| class.edge_cuts[e].map(|c| (e, c.point)))
        .collect();
    if cut_edges.len() != 2 {
        return Err(GeomError::Resolution {
            elem,
            reason: format!("expected 2 cut edges, found {}", cut_edges.len()),
        });
    }

    // Walk the element boundary counterclockwise, inserting the cut points;
    // both side polygons are convex and share the chord.
    let mut poly: [Vec<Vec2>; 2] = [Vec::new(), Vec::new()];
    for s in 0..3 {
        let va = tri[s];
        let pa = mesh.vertices[va];
        let side = Side::from_phi(class.vertex_phi[va]);
        poly[side.index()].push(pa);
        let e = mesh.tri_edges[elem][s];
        if let Some(cut) = class.edge_cuts[e] {
            poly[0].push(cut.point);
            poly[1].push(cut.point);
        }
    }
    let (p, q) = (cut_edges[0].1, cut_edges[1].1);

    let rule = triangle_rule(degree).map_err(|e| GeomError::Degenerate(e.to_string()))?;
    let mut side_pts: [Vec<Vec2>; 2] = [Vec::new(), Vec::new()];
    let mut side_wts: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for side in 0..2 {
        let pts = &poly[side];
        for i in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (pts[0], pts[i], pts[i + 1]);
            let area2 = ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs();
            if area2 < 1e-300 {
                continue;
            }
            let (mp, mw) = map_tri_rule(&rule, a, b, c);
            side_pts[side].extend(mp);
            side_wts[side].extend(mw);
        }
    }

    let iface = match geom {
        GeometryDescriptor::Circle { center, radius } => {
            let a0 = angle_of(p - center);
            let da = wrap_angle(angle_of(q - center) - a0);
            let a1 = a0 + da;
            add_lens_patches(&mut side_pts, &mut side_wts, *center, *radius, p, q, a0, a1, degree);
            InterfaceGeom::Arc {
                center: *center,
                radius: *radius,
                a0,
                a1,
            }
        }
        _ => {
            let normal = oriented_segment_normal(geom, p, q);
            InterfaceGeom::Segment { p, q, normal }
        }
    };

    Ok(CutCell {
        elem,
        side_pts,
        side_wts,
        chord: (p, q),
        iface,
    })
}

/// Quadrature points, weights and unit normals on the interface portion of a
/// cut element. Normals point from side 1 into side 2; weights sum to the
/// exact arc/segment length.
pub fn interface_rule(cell: &CutCell, degree: usize) -> (Vec<Vec2>, Vec<f64>, Vec<Vec2>) {
    match &cell.iface {
        InterfaceGeom::Arc {
            center,
            radius,
            a0,
            a1,
        } => {
            let n = ((degree + 1).div_ceil(2)).max(MIN_CURVED_POINTS);
            let (gx, gw) = gauss_unit(n);
            let da = a1 - a0;
            let mut pts = Vec::with_capacity(n);
            let mut wts = Vec::with_capacity(n);
            let mut nrm = Vec::with_capacity(n);
            for (t, w) in gx.iter().zip(&gw) {
                let a = a0 + t * da;
                let e = Vec2::new(a.cos(), a.sin());
                pts.push(center + e * *radius);
                wts.push(w * da.abs() * radius);
                // Into the disk, i.e. from side 1 (outside) to side 2.
                nrm.push(-e);
            }
            (pts, wts, nrm)
        }
        InterfaceGeom::Segment { p, q, normal } => {
            let n = ((degree + 1).div_ceil(2)).max(2);
            let (gx, gw) = gauss_unit(n);
            let len = (q - p).norm();
            let pts: Vec<Vec2> = gx.iter().map(|&t| p + (q - p) * t).collect();
            let wts: Vec<f64> = gw.iter().map(|w| w * len).collect();
            let nrm = vec![*normal; pts.len()];
            (pts, wts, nrm)
        }
    }
}

/// Blended (transfinite) patch between the chord and the exact arc. The lens
/// lies inside the disk, so it is added to side 2 and subtracted from the
/// side-1 polygon that geometrically contains it.
#[allow(clippy::too_many_arguments)]
fn add_lens_patches(
    side_pts: &mut [Vec<Vec2>; 2],
    side_wts: &mut [Vec<f64>; 2],
    center: Vec2,
    radius: f64,
    p: Vec2,
    q: Vec2,
    a0: f64,
    a1: f64,
    degree: usize,
) {
    let n = ((degree + 2).div_ceil(2)).max(MIN_CURVED_POINTS);
    let (gx, gw) = gauss_unit(n);
    let da = a1 - a0;
    for (is, &s) in gx.iter().enumerate() {
        for (it, &t) in gx.iter().enumerate() {
            let a = a0 + t * da;
            let e = Vec2::new(a.cos(), a.sin());
            let arc = center + e * radius;
            let chord = p + (q - p) * t;
            let pos = chord + (arc - chord) * s;
            // L(s,t) = (1-s) chord(t) + s arc(t):
            let dt = (q - p) * (1.0 - s) + Vec2::new(-a.sin(), a.cos()) * (radius * da * s);
            let ds = arc - chord;
            let jac = (dt.x * ds.y - dt.y * ds.x).abs();
            let w = gw[is] * gw[it] * jac;
            side_pts[Side::Two.index()].push(pos);
            side_wts[Side::Two.index()].push(w);
            side_pts[Side::One.index()].push(pos);
            side_wts[Side::One.index()].push(-w);
        }
    }
}

/// Unit normal of a straight interface segment, oriented from side 1 (phi>0)
/// into side 2.
fn oriented_segment_normal(geom: &GeometryDescriptor, p: Vec2, q: Vec2) -> Vec2 {
    let d = (q - p).normalize();
    let mut n = Vec2::new(d.y, -d.x);
    let mid = 0.5 * (p + q);
    let eps = 1e-7 * (q - p).norm().max(1e-12);
    if geom.phi(mid + n * eps) > geom.phi(mid - n * eps) {
        n = -n;
    }
    n
}

fn angle_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

fn wrap_angle(mut a: f64) -> f64 {
    use std::f64::consts::PI;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify, ElemTag};
    use crate::mesh::{build_uniform_mesh, Rect};

    fn vertical_line() -> GeometryDescriptor {
        GeometryDescriptor::Polyline {
            points: vec![Vec2::new(0.5, -1.0), Vec2::new(0.5, 2.0)],
        }
    }

    #[test]
    fn straight_cut_of_reference_triangle() {
        // Triangle (0,0),(1,0),(0,1) cut by x = 1/2: the x > 1/2 piece has
        // area 1/8, the x < 1/2 piece 3/8.
        let mesh = build_uniform_mesh(1, Rect::unit()).unwrap();
        // Element 1 is (0,0),(1,1),(0,1); build a bespoke check on element 0
        // instead: (0,0),(1,0),(1,1) — adjust to the spec triangle by using a
        // custom mesh is overkill; use the lower-left triangle of a 1x1 mesh
        // mirrored: integrate directly.
        let geom = vertical_line();
        let class = classify(&mesh, &geom).unwrap();
        // Element 1: vertices (0,0),(1,1),(0,1): cut by x=1/2 into a small
        // triangle-ish piece (x>1/2) and a quad.
        let cell = cut_element(&mesh, 1, &geom, &class, 4).unwrap();
        let a1 = cell.side_area(Side::One); // x < 1/2
        let a2 = cell.side_area(Side::Two); // x > 1/2
        assert!((a1 + a2 - 0.5).abs() < 1e-12, "partition of unity");
        // Exact: region x>0.5 within that triangle is bounded by y from x to
        // 1: area = int_{1/2}^{1} (1-x) dx = 1/8.
        assert!((a2 - 0.125).abs() < 1e-12);
        assert!((a1 - 0.375).abs() < 1e-12);
    }

    #[test]
    fn chord_length_matches_intersections() {
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.5, 0.5),
            radius: (3.0f64 / 64.0).sqrt(),
        };
        let class = classify(&mesh, &geom).unwrap();
        for &t in &class.cut_elems {
            let cell = cut_element(&mesh, t, &geom, &class, 4).unwrap();
            let cuts: Vec<Vec2> = mesh.tri_edges[t]
                .iter()
                .filter_map(|&e| class.edge_cuts[e].map(|c| c.point))
                .collect();
            let d = (cuts[0] - cuts[1]).norm();
            assert!((cell.chord_length() - d).abs() < 1e-14);
        }
    }

    #[test]
    fn partition_of_unity_on_cut_elements() {
        let mesh = build_uniform_mesh(16, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.5, 0.5),
            radius: (3.0f64 / 64.0).sqrt(),
        };
        let class = classify(&mesh, &geom).unwrap();
        for &t in &class.cut_elems {
            let cell = cut_element(&mesh, t, &geom, &class, 4).unwrap();
            let total = cell.side_area(Side::One) + cell.side_area(Side::Two);
            assert!(
                (total - mesh.tri_area(t)).abs() < 1e-12,
                "element {t}: {} vs {}",
                total,
                mesh.tri_area(t)
            );
        }
    }

    #[test]
    fn disk_area_from_patches() {
        // Summing side-2 areas over cut elements plus whole areas of interior
        // side-2 elements reproduces the disk area pi r^2, r^2 = 3/64.
        let mesh = build_uniform_mesh(16, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.5, 0.5),
            radius: (3.0f64 / 64.0).sqrt(),
        };
        let class = classify(&mesh, &geom).unwrap();
        let mut area = 0.0;
        for t in 0..mesh.triangles.len() {
            match class.elem_tags[t] {
                ElemTag::Interior(Side::Two) => area += mesh.tri_area(t),
                ElemTag::Cut => {
                    let cell = cut_element(&mesh, t, &geom, &class, 6).unwrap();
                    area += cell.side_area(Side::Two);
                }
                _ => {}
            }
        }
        let exact = std::f64::consts::PI * 3.0 / 64.0;
        assert!((area - exact).abs() < 1e-10, "disk area {area} vs {exact}");
    }

    #[test]
    fn interface_length_and_normals() {
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        let r = (3.0f64 / 64.0).sqrt();
        let geom = GeometryDescriptor::Circle {
            center: Vec2::new(0.5, 0.5),
            radius: r,
        };
        let class = classify(&mesh, &geom).unwrap();
        let mut length = 0.0;
        for &t in &class.cut_elems {
            let cell = cut_element(&mesh, t, &geom, &class, 4).unwrap();
            let (pts, wts, nrm) = interface_rule(&cell, 4);
            length += wts.iter().sum::<f64>();
            let hk = mesh.tri_diameter(t);
            for (p, n) in pts.iter().zip(&nrm) {
                assert!(((p - Vec2::new(0.5, 0.5)).norm() - r).abs() < 1e-12, "on the arc");
                assert!((n.norm() - 1.0).abs() < 1e-12, "unit normal");
                // Oriented from side 1 into side 2.
                let eps = 1e-6;
                assert!(geom.phi(p + n * eps) < 0.0 && geom.phi(p - n * eps) > 0.0);
                // Tangent orthogonality.
                let tang = Vec2::new(-(p.y - 0.5), p.x - 0.5).normalize();
                assert!(n.dot(&tang).abs() < 1e-12);
            }
            // Assumption (A3): normal variation over one interface piece is
            // bounded by h_K / r for circles.
            for i in 0..nrm.len() {
                for j in i + 1..nrm.len() {
                    assert!((nrm[i] - nrm[j]).norm() <= hk / r + 1e-12);
                }
            }
        }
        let exact = 2.0 * std::f64::consts::PI * r;
        assert!(
            (length - exact).abs() < 1e-10,
            "circumference {length} vs {exact}"
        );
    }

    #[test]
    fn straight_interface_weights_sum_to_chord() {
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        let geom = GeometryDescriptor::Slit {
            start: Vec2::new(0.0, 0.52),
            tip: Vec2::new(0.9, 0.52),
        };
        let class = classify(&mesh, &geom).unwrap();
        for &t in &class.cut_elems {
            let cell = cut_element(&mesh, t, &geom, &class, 3).unwrap();
            let (_, wts, nrm) = interface_rule(&cell, 3);
            let total: f64 = wts.iter().sum();
            assert!((total - cell.chord_length()).abs() < 1e-13);
            for n in &nrm {
                // Side 1 is above the slit, so the normal points down.
                assert!((n - Vec2::new(0.0, -1.0)).norm() < 1e-14);
            }
        }
    }
}
