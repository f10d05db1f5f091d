//! Finite-volume simulation of the 2-D defocusing nonlinear Schrödinger
//! equation with locally distributed damping,
//!
//! ```text
//! i y_t + Δy − |y|^{2(p−1)} y + i a(x) y = 0   in Ω,   y = 0 on ∂Ω,
//! ```
//!
//! on admissible Voronoi meshes, with a mass- and energy-preserving
//! midpoint time discretisation of the nonlinearity.

pub mod damping;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};
pub use functionals::ComplexField;
pub use geometry::Vec2;
pub use mesh::{DomainSpec, Mesh};
