//! An arbitrary-order eXtended hybridizable discontinuous Galerkin (X-HDG)
//! solver for two-dimensional linear elasticity interface problems on meshes
//! that do not fit the material interface or the domain boundary.
//!
//! The crate is organized along the solver pipeline:
//!
//! - [`mesh`]: uniform triangulations of a bounding box with edge connectivity
//! - [`geometry`]: level-set descriptors, element/edge classification,
//!   cut-cell quadrature on curved sub-regions
//! - [`quadrature`], [`basis`], [`projection`]: reference rules, scaled
//!   monomial bases and local L2 projections
//! - [`material`]: Lamé parameters and the compliance map
//! - [`spaces`]: degree-of-freedom maps for the interface and
//!   boundary-unfitted trace spaces, Dirichlet constraints
//! - [`assembly`]: element-local saddle systems, static condensation and the
//!   global condensed trace system
//! - [`solver`]: sparse symmetric factorization with minimum-degree ordering
//! - [`problems`]: manufactured solutions with exact stress/displacement pairs
//! - [`driver`]: field recovery, error norms, convergence studies, CSV output
//! - [`verify`]: the self-contained property suite run by `xhdg verify`

pub mod assembly;
pub mod basis;
pub mod driver;
pub mod geometry;
pub mod material;
pub mod mesh;
pub mod problems;
pub mod projection;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod verify;

/// 2D point / vector type used throughout.
pub type Vec2 = nalgebra::Vector2<f64>;

pub use nalgebra::{DMatrix, DVector};
