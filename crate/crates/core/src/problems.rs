//! Catalog of manufactured cases with exact displacement/stress pairs and
//! derived data (body force, boundary and interface data).
//!
//! All derivatives are hand-coded; the test suite checks every case against
//! central finite differences. Every catalogued displacement is
//! divergence-free (or the stress is in closed form), so the exact stress
//! does not depend on lambda and the near-incompressible runs probe the
//! scheme, not the data.

use crate::geometry::{GeometryDescriptor, Side};
use crate::material::{tensor_dot_normal, Material, SymTensor};
use crate::mesh::Rect;
use crate::Vec2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case name `{0}`")]
    UnknownName(String),
    #[error("Poisson ratio 0.5 gives infinite lambda")]
    IncompressibleLimit,
}

/// Which X-HDG scheme a case runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Material interface inside the domain; both sides carry unknowns and
    /// the interface trace is single-valued.
    Interface,
    /// The geometry is the (unfitted) domain boundary; inactive sides carry
    /// no unknowns, and crack faces carry independent per-side traces.
    Unfitted,
}

/// Boundary-condition kind for a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone)]
enum Exact {
    /// u = (-a(x) b(y), a(y) b(x)) with a = t^2(t-1)^2, b = t(t-1)(2t-1);
    /// divergence-free, vanishes on the unit-square boundary.
    Bubble,
    /// u = (y^4, x^4); divergence-free.
    Quartic,
    /// Mode-I Williams field with intensity `k1` and Kolosov constant
    /// `kappa`, crack along theta = pi from the tip.
    Crack { tip: Vec2, k1: f64, kappa: f64 },
    /// u = G p + d with constant stress; exercised by patch tests.
    Linear { g: [[f64; 2]; 2], d: [f64; 2] },
}

/// A manufactured problem: geometry, scheme, material and exact fields.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub geometry: GeometryDescriptor,
    pub scheme: Scheme,
    pub material: Material,
    /// Sides carrying unknowns (both for interface problems; the inside or
    /// outside of the level set for fictitious-domain ones).
    pub active: [bool; 2],
    pub bbox: Rect,
    /// Boundary condition carried by the unfitted geometry face (circle arc
    /// or crack faces); mesh-boundary edges use [`ManufacturedCase::boundary_bc`].
    pub unfitted_face_bc: BcKind,
    exact: Exact,
    /// Right-of-box Neumann strip for mixed-BC patch tests.
    neumann_right: bool,
}

/// Tunable parameters of [`make_case`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CaseParams {
    /// Poisson ratio in the inclusion for `circle-interface` (default 0.4).
    pub nu2: Option<f64>,
    /// Poisson ratio for `circle-domain` (default 0.49).
    pub nu: Option<f64>,
    /// Lamé lambda for `nonconvex-domain` (default 1.0).
    pub lambda: Option<f64>,
}

/// Build one of the catalogued cases:
/// `circle-interface`, `circle-domain`, `nonconvex-domain`, `crack-tip`.
pub fn make_case(name: &str, params: CaseParams) -> Result<ManufacturedCase, CaseError> {
    let check_nu = |nu: f64| {
        if nu >= 0.5 {
            Err(CaseError::IncompressibleLimit)
        } else {
            Ok(nu)
        }
    };
    match name {
        "circle-interface" => {
            let nu2 = check_nu(params.nu2.unwrap_or(0.4))?;
            Ok(ManufacturedCase {
                name: name.into(),
                geometry: GeometryDescriptor::Circle {
                    center: Vec2::new(0.5, 0.5),
                    radius: (3.0f64 / 64.0).sqrt(),
                },
                scheme: Scheme::Interface,
                material: Material::plane_strain([3.0, 3.0], [0.4, nu2]),
                active: [true, true],
                bbox: Rect::unit(),
                unfitted_face_bc: BcKind::Neumann,
                exact: Exact::Bubble,
                neumann_right: false,
            })
        }
        "circle-domain" => {
            let nu = check_nu(params.nu.unwrap_or(0.49))?;
            Ok(ManufacturedCase {
                name: name.into(),
                geometry: GeometryDescriptor::Circle {
                    center: Vec2::new(0.5, 0.5),
                    radius: (3.0f64 / 16.0).sqrt(),
                },
                scheme: Scheme::Unfitted,
                material: Material::plane_strain([3.0, 3.0], [nu, nu]),
                active: [false, true],
                bbox: Rect::unit(),
                unfitted_face_bc: BcKind::Dirichlet,
                exact: Exact::Bubble,
                neumann_right: false,
            })
        }
        "nonconvex-domain" => {
            let lambda = params.lambda.unwrap_or(1.0);
            Ok(ManufacturedCase {
                name: name.into(),
                geometry: GeometryDescriptor::Circle {
                    center: Vec2::new(0.5, 0.5),
                    radius: (3.0f64 / 64.0).sqrt(),
                },
                scheme: Scheme::Unfitted,
                material: Material::from_lame([1.0, 1.0], [lambda, lambda]),
                active: [true, false],
                bbox: Rect::unit(),
                unfitted_face_bc: BcKind::Dirichlet,
                exact: Exact::Quartic,
                neumann_right: false,
            })
        }
        "crack-tip" => {
            let nu = 1.0 / 3.0;
            let e = 8.0 / 3.0;
            let tip = Vec2::new(0.5, 0.5);
            Ok(ManufacturedCase {
                name: name.into(),
                geometry: GeometryDescriptor::Slit {
                    start: Vec2::new(0.0, 0.5),
                    tip,
                },
                scheme: Scheme::Unfitted,
                material: Material::plane_stress([e, e], [nu, nu]),
                active: [true, true],
                bbox: Rect::unit(),
                unfitted_face_bc: BcKind::Neumann,
                exact: Exact::Crack {
                    tip,
                    k1: (std::f64::consts::PI / 2.0).sqrt(),
                    kappa: (3.0 - nu) / (1.0 + nu),
                },
                neumann_right: false,
            })
        }
        other => Err(CaseError::UnknownName(other.into())),
    }
}

/// Patch-test case: linear exact displacement, constant stress, matching
/// materials across the geometry, on either scheme.
pub fn linear_patch_case(scheme: Scheme, mixed_neumann: bool) -> ManufacturedCase {
    let (geometry, active) = match scheme {
        Scheme::Interface => (
            GeometryDescriptor::Circle {
                center: Vec2::new(0.5, 0.5),
                radius: (3.0f64 / 64.0).sqrt(),
            },
            [true, true],
        ),
        Scheme::Unfitted => (
            GeometryDescriptor::Circle {
                center: Vec2::new(0.5, 0.5),
                radius: (3.0f64 / 16.0).sqrt(),
            },
            [false, true],
        ),
    };
    ManufacturedCase {
        name: "linear-patch".into(),
        geometry,
        scheme,
        material: Material::from_lame([1.3, 1.3], [0.9, 0.9]),
        active,
        bbox: Rect::unit(),
        unfitted_face_bc: BcKind::Dirichlet,
        exact: Exact::Linear {
            g: [[0.3, 0.5], [-0.2, 0.5]],
            d: [0.1, -0.4],
        },
        neumann_right: mixed_neumann && scheme == Scheme::Interface,
    }
}

/// Zero-data variant of the interface configuration (Theorem-2.2 probe:
/// vanishing data must give the exactly zero solution).
pub fn zero_case() -> ManufacturedCase {
    let mut case = linear_patch_case(Scheme::Interface, false);
    case.name = "zero".into();
    case.exact = Exact::Linear {
        g: [[0.0, 0.0], [0.0, 0.0]],
        d: [0.0, 0.0],
    };
    case
}

impl ManufacturedCase {
    /// Exact displacement. The crack field is continuous except across the
    /// slit, where the side (sign of y - y_c) picks the branch of theta.
    pub fn u(&self, p: Vec2, side: Side) -> [f64; 2] {
        match &self.exact {
            Exact::Bubble => {
                let (a, b) = (bubble_a(p.x), bubble_b(p.y));
                let (ay, bx) = (bubble_a(p.y), bubble_b(p.x));
                [-a * b, ay * bx]
            }
            Exact::Quartic => [p.y.powi(4), p.x.powi(4)],
            Exact::Crack { tip, k1, kappa } => {
                let (r, th) = crack_polar(p, side, *tip);
                let mu = self.material.mu(side);
                let c = (th / 2.0).cos();
                let s = (th / 2.0).sin();
                let amp = k1 / (2.0 * mu) * (r / (2.0 * std::f64::consts::PI)).sqrt();
                [
                    amp * c * (kappa - 1.0 + 2.0 * s * s),
                    amp * s * (kappa + 1.0 - 2.0 * c * c),
                ]
            }
            Exact::Linear { g, d } => [
                g[0][0] * p.x + g[0][1] * p.y + d[0],
                g[1][0] * p.x + g[1][1] * p.y + d[1],
            ],
        }
    }

    /// Exact stress (t11, t22, t12); `side` selects the material and, for
    /// the crack, the branch of theta on the slit itself.
    pub fn sigma(&self, p: Vec2, side: Side) -> SymTensor {
        let mu = self.material.mu(side);
        match &self.exact {
            Exact::Bubble => {
                let bb = bubble_b(p.x) * bubble_b(p.y);
                let s12 = mu * (bubble_a(p.y) * bubble_db(p.x) - bubble_a(p.x) * bubble_db(p.y));
                [-4.0 * mu * bb, 4.0 * mu * bb, s12]
            }
            Exact::Quartic => [0.0, 0.0, 4.0 * mu * (p.x.powi(3) + p.y.powi(3))],
            Exact::Crack { tip, k1, .. } => {
                let (r, th) = crack_polar(p, side, *tip);
                let c = (th / 2.0).cos();
                let s = (th / 2.0).sin();
                let s3 = (1.5 * th).sin();
                let c3 = (1.5 * th).cos();
                let amp = k1 / (2.0 * std::f64::consts::PI * r).sqrt();
                [
                    amp * c * (1.0 - s * s3),
                    amp * c * (1.0 + s * s3),
                    amp * c * s * c3,
                ]
            }
            Exact::Linear { g, .. } => {
                let e11 = g[0][0];
                let e22 = g[1][1];
                let e12 = 0.5 * (g[0][1] + g[1][0]);
                let la = self.material.lambda(side);
                let tr = e11 + e22;
                [
                    2.0 * mu * e11 + la * tr,
                    2.0 * mu * e22 + la * tr,
                    2.0 * mu * e12,
                ]
            }
        }
    }

    /// Exact strain; by the constitutive law this is the compliance applied
    /// to the exact stress.
    pub fn strain(&self, p: Vec2, side: Side) -> SymTensor {
        self.material.apply_compliance(side, self.sigma(p, side))
    }

    /// Body force f = div sigma.
    pub fn body_force(&self, p: Vec2, side: Side) -> [f64; 2] {
        let mu = self.material.mu(side);
        match &self.exact {
            Exact::Bubble => {
                let (bx, by) = (bubble_b(p.x), bubble_b(p.y));
                let (dbx, dby) = (bubble_db(p.x), bubble_db(p.y));
                let (ax, ay) = (bubble_a(p.x), bubble_a(p.y));
                let (d2bx, d2by) = (bubble_d2b(p.x), bubble_d2b(p.y));
                [
                    mu * (-2.0 * dbx * by - ax * d2by),
                    mu * (ay * d2bx + 2.0 * bx * dby),
                ]
            }
            Exact::Quartic => [12.0 * mu * p.y * p.y, 12.0 * mu * p.x * p.x],
            // The Williams field is in equilibrium.
            Exact::Crack { .. } => [0.0, 0.0],
            Exact::Linear { .. } => [0.0, 0.0],
        }
    }

    /// Dirichlet datum g_D = u restricted to the boundary.
    pub fn g_d(&self, p: Vec2, side: Side) -> [f64; 2] {
        self.u(p, side)
    }

    /// Neumann datum g_N = sigma n with the outward normal `n`.
    pub fn g_n(&self, p: Vec2, side: Side, n: Vec2) -> [f64; 2] {
        tensor_dot_normal(self.sigma(p, side), [n.x, n.y])
    }

    /// Interface traction jump g_N^Gamma = [[sigma n]] = (sigma_1 - sigma_2) n
    /// with `n` pointing from side 1 into side 2.
    pub fn g_n_gamma(&self, p: Vec2, n: Vec2) -> [f64; 2] {
        let s1 = self.sigma(p, Side::One);
        let s2 = self.sigma(p, Side::Two);
        tensor_dot_normal([s1[0] - s2[0], s1[1] - s2[1], s1[2] - s2[2]], [n.x, n.y])
    }

    /// Boundary-condition kind for a mesh-boundary edge with midpoint `mid`.
    pub fn boundary_bc(&self, mid: Vec2) -> BcKind {
        if self.neumann_right && mid.x > self.bbox.x1 - 1e-12 {
            BcKind::Neumann
        } else {
            BcKind::Dirichlet
        }
    }

    /// Total polynomial degree of the exact displacement, when polynomial.
    pub fn exact_degree(&self) -> Option<usize> {
        match self.exact {
            Exact::Bubble => Some(7),
            Exact::Quartic => Some(4),
            Exact::Crack { .. } => None,
            Exact::Linear { .. } => Some(1),
        }
    }

    pub fn is_crack(&self) -> bool {
        matches!(self.exact, Exact::Crack { .. })
    }
}

fn crack_polar(p: Vec2, side: Side, tip: Vec2) -> (f64, f64) {
    let d = p - tip;
    let r = d.norm();
    assert!(r > 0.0, "crack fields are singular at the tip");
    let mut th = d.y.atan2(d.x);
    // On the slit itself atan2 is ambiguous; the side picks the branch.
    if d.x < 0.0 && d.y.abs() < 1e-13 * r.max(1.0) {
        th = match side {
            Side::One => std::f64::consts::PI,
            Side::Two => -std::f64::consts::PI,
        };
    }
    (r, th)
}

// u = (-a(x) b(y), a(y) b(x)) building blocks; a' = 2b.
fn bubble_a(t: f64) -> f64 {
    let s = t * (t - 1.0);
    s * s
}

fn bubble_b(t: f64) -> f64 {
    t * (t - 1.0) * (2.0 * t - 1.0)
}

fn bubble_db(t: f64) -> f64 {
    6.0 * t * t - 6.0 * t + 1.0
}

fn bubble_d2b(t: f64) -> f64 {
    12.0 * t - 6.0
}
