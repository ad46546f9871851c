//! Uniform triangulations of an axis-aligned bounding box.
//!
//! Every grid square is split along the lower-left to upper-right diagonal,
//! so an n x n grid has 2n^2 triangles, (n+1)^2 vertices and n(3n+2) edges.
//! Construction is fully deterministic: running it twice with the same inputs
//! produces identical numbering.

use crate::Vec2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("subdivision count must be at least 1")]
    ZeroSubdivisions,
    #[error("bounding box must have positive width and height")]
    DegenerateBox,
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn unit() -> Self {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Mesh edge with its one or two adjacent triangles.
#[derive(Debug, Clone)]
pub struct Edge {
    /// Vertex ids, ordered v[0] < v[1].
    pub v: [usize; 2],
    pub tri_a: usize,
    pub tri_b: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tri_b.is_none()
    }
}

/// Structured triangulation of a bounding box.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Vertex-index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Edge ids of each triangle, matching local sides (v0v1, v1v2, v2v0).
    pub tri_edges: Vec<[usize; 3]>,
    /// Subdivision count per axis.
    pub n: usize,
    pub bbox: Rect,
}

/// Build the uniform n x n triangulation of `bbox`.
pub fn build_uniform_mesh(n: usize, bbox: Rect) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroSubdivisions);
    }
    if !(bbox.width() > 0.0) || !(bbox.height() > 0.0) {
        return Err(MeshError::DegenerateBox);
    }
    let np = n + 1;
    let mut vertices = Vec::with_capacity(np * np);
    for iy in 0..np {
        for ix in 0..np {
            vertices.push(Vec2::new(
                bbox.x0 + bbox.width() * ix as f64 / n as f64,
                bbox.y0 + bbox.height() * iy as f64 / n as f64,
            ));
        }
    }
    let vid = |ix: usize, iy: usize| iy * np + ix;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for iy in 0..n {
        for ix in 0..n {
            let v00 = vid(ix, iy);
            let v10 = vid(ix + 1, iy);
            let v11 = vid(ix + 1, iy + 1);
            let v01 = vid(ix, iy + 1);
            // Diagonal v00 -> v11; both triangles counterclockwise.
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut edge_of = std::collections::HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut tri_edges = Vec::with_capacity(triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        let mut ids = [0usize; 3];
        for s in 0..3 {
            let a = tri[s];
            let b = tri[(s + 1) % 3];
            let key = (a.min(b), a.max(b));
            let id = *edge_of.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    v: [key.0, key.1],
                    tri_a: t,
                    tri_b: None,
                });
                edges.len() - 1
            });
            if edges[id].tri_a != t {
                debug_assert!(edges[id].tri_b.is_none());
                edges[id].tri_b = Some(t);
            }
            ids[s] = id;
        }
        tri_edges.push(ids);
    }

    Ok(Mesh {
        vertices,
        triangles,
        edges,
        tri_edges,
        n,
        bbox,
    })
}

impl Mesh {
    pub fn tri_vertices(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area (positive for counterclockwise orientation).
    pub fn tri_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_vertices(t);
        0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
    }

    pub fn tri_centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.tri_vertices(t);
        (a + b + c) / 3.0
    }

    /// Element diameter h_K (longest edge).
    pub fn tri_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_vertices(t);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    pub fn edge_points(&self, e: usize) -> (Vec2, Vec2) {
        let ed = &self.edges[e];
        (self.vertices[ed.v[0]], self.vertices[ed.v[1]])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (p, q) = self.edge_points(e);
        (q - p).norm()
    }

    /// Unit normal on edge `e` pointing out of triangle `t`.
    pub fn edge_outward_normal(&self, e: usize, t: usize) -> Vec2 {
        let (p, q) = self.edge_points(e);
        let d = q - p;
        let mut n = Vec2::new(d.y, -d.x).normalize();
        let cen = self.tri_centroid(t);
        if n.dot(&(cen - p)) > 0.0 {
            n = -n;
        }
        n
    }

    /// Does the closed triangle `t` contain `p` (with tolerance)?
    pub fn tri_contains(&self, t: usize, p: Vec2, tol: f64) -> bool {
        let [a, b, c] = self.tri_vertices(t);
        let cross = |u: Vec2, v: Vec2, w: Vec2| (v.x - u.x) * (w.y - u.y) - (v.y - u.y) * (w.x - u.x);
        cross(a, b, p) >= -tol && cross(b, c, p) >= -tol && cross(c, a, p) >= -tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_invariants(mesh: &Mesh) {
        let n = mesh.n;
        assert_eq!(mesh.triangles.len(), 2 * n * n);
        assert_eq!(mesh.vertices.len(), (n + 1) * (n + 1));
        assert_eq!(mesh.edges.len(), n * (3 * n + 2));
        for t in 0..mesh.triangles.len() {
            assert!(mesh.tri_area(t) > 0.0, "triangle {t} not ccw");
        }
        // Interior edges have 2 adjacent triangles, boundary edges 1; each
        // triangle appears in the adjacency of each of its 3 edges.
        let mut count = vec![0usize; mesh.edges.len()];
        for (t, ids) in mesh.tri_edges.iter().enumerate() {
            for &e in ids {
                count[e] += 1;
                let ed = &mesh.edges[e];
                assert!(ed.tri_a == t || ed.tri_b == Some(t));
            }
        }
        for (e, ed) in mesh.edges.iter().enumerate() {
            let expected = if ed.is_boundary() { 1 } else { 2 };
            assert_eq!(count[e], expected, "edge {e} adjacency");
        }
    }

    #[test]
    fn unit_square_n1() {
        let mesh = build_uniform_mesh(1, Rect::unit()).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.edges.len(), 5);
        check_invariants(&mesh);
    }

    #[test]
    fn unit_square_n8() {
        let mesh = build_uniform_mesh(8, Rect::unit()).unwrap();
        assert_eq!(mesh.triangles.len(), 128);
        assert_eq!(mesh.vertices.len(), 81);
        assert_eq!(mesh.edges.len(), 208);
        check_invariants(&mesh);
    }

    #[test]
    fn areas_partition_the_box() {
        for n in [1, 3, 8] {
            let bbox = Rect {
                x0: -0.5,
                y0: 0.25,
                x1: 2.0,
                y1: 1.5,
            };
            let mesh = build_uniform_mesh(n, bbox).unwrap();
            let total: f64 = (0..mesh.triangles.len()).map(|t| mesh.tri_area(t)).sum();
            assert!((total - bbox.width() * bbox.height()).abs() < 1e-12);
        }
    }

    #[test]
    fn max_diameter_on_unit_square() {
        let mesh = build_uniform_mesh(4, Rect::unit()).unwrap();
        let hmax = (0..mesh.triangles.len())
            .map(|t| mesh.tri_diameter(t))
            .fold(0.0f64, f64::max);
        assert!((hmax - 2.0f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_uniform_mesh(0, Rect::unit()).is_err());
        assert!(build_uniform_mesh(
            2,
            Rect {
                x0: 0.0,
                y0: 0.0,
                x1: 0.0,
                y1: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn deterministic_rebuild() {
        let a = build_uniform_mesh(5, Rect::unit()).unwrap();
        let b = build_uniform_mesh(5, Rect::unit()).unwrap();
        assert_eq!(a.triangles, b.triangles);
        let ea: Vec<_> = a.edges.iter().map(|e| e.v).collect();
        let eb: Vec<_> = b.edges.iter().map(|e| e.v).collect();
        assert_eq!(ea, eb);
    }

    proptest! {
        #[test]
        fn invariants_hold_for_random_grids(n in 1usize..12, w in 0.1f64..10.0, h in 0.1f64..10.0) {
            let bbox = Rect { x0: -1.0, y0: 2.0, x1: -1.0 + w, y1: 2.0 + h };
            let mesh = build_uniform_mesh(n, bbox).unwrap();
            check_invariants(&mesh);
            let total: f64 = (0..mesh.triangles.len()).map(|t| mesh.tri_area(t)).sum();
            prop_assert!((total - w * h).abs() < 1e-10 * w * h.max(1.0));
        }
    }
}
