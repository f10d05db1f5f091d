//! Time stepping for the damped nonlinear Schrödinger equation.
//!
//! Each step solves, for every cell `K`,
//!
//! ```text
//! i m(K) (y_K^{n+1} − y_K^n)/Δt + Σ_σ F_{K,σ}^{n+½}
//!     − m(K)/(2p) · q_K · (y_K^{n+1} + y_K^n) + i m(K) a(x_K) y_K^{n+½} = 0
//! ```
//!
//! with two-point fluxes `F = τ_σ (y_L − y_K)` inside and `−τ_σ y_K` on the
//! boundary, and the energy-preserving coefficient
//! `q_K = (|y_K^{n+1}|^{2p} − |y_K^n|^{2p}) / (|y_K^{n+1}|² − |y_K^n|²)`.
//!
//! `p` is the scheme exponent: the potential energy density is
//! `|y|^{2p}/(2p)`, so the continuous nonlinearity is `|y|^{2(p−1)} y`
//! (`p = 2` is the cubic equation).

mod gmres;
mod scheme;
mod sparse;

pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use scheme::{
    assemble_step_system, nonlinear_coefficient, picard_step, run_simulation, sample_initial_condition,
    InitialCondition, RunOptions, SchemeConfig, SimulationOutput, Snapshot, SparseComplexSystem, StepResult,
    Stepper,
};
pub use sparse::CsrMatrix;

pub fn gmres_solve(system: &SparseComplexSystem, x0: &[num_complex::Complex64], config: &SchemeConfig) -> crate::Result<GmresOutcome> {
    gmres(&system.matrix, &system.rhs, x0, &config.gmres_options())
}
