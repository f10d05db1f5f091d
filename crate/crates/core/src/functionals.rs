//! Discrete norms and the mass/energy functionals.
//!
//! All reductions go through [`pairwise_sum`] so results do not depend on
//! how the terms were produced.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Face, Mesh};

/// A piecewise-constant complex field, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    values: Vec<Complex64>,
    mesh_id: u64,
}

impl ComplexField {
    pub fn new(mesh: &Mesh, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_cells(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite field value in cell {i}")));
        }
        Ok(ComplexField {
            values,
            mesh_id: mesh.id(),
        })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        ComplexField {
            values: vec![Complex64::new(0.0, 0.0); mesh.n_cells()],
            mesh_id: mesh.id(),
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(crate::geometry::Vec2) -> Complex64) -> Self {
        ComplexField {
            values: mesh.cells().iter().map(|c| f(c.point)).collect(),
            mesh_id: mesh.id(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn from_raw(values: Vec<Complex64>, mesh_id: u64) -> Self {
        ComplexField { values, mesh_id }
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id() || self.values.len() != mesh.n_cells() {
            return Err(Error::MeshMismatch {
                field: self.mesh_id,
                mesh: mesh.id(),
            });
        }
        Ok(())
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        ComplexField {
            values: self.values.iter().map(|z| z * factor).collect(),
            mesh_id: self.mesh_id,
        }
    }
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `D_σ y`: `y_L − y_K` on interior faces, `−y_K` on boundary faces.
#[inline]
pub fn d_sigma(values: &[Complex64], face: &Face) -> Complex64 {
    match face.cell_l {
        Some(l) => values[l] - values[face.cell_k],
        None => -values[face.cell_k],
    }
}

fn cell_sum(field: &ComplexField, mesh: &Mesh, f: impl Fn(f64) -> f64) -> Result<f64> {
    field.check_mesh(mesh)?;
    let terms: Vec<f64> = field
        .values
        .iter()
        .zip(mesh.cells())
        .map(|(z, c)| f(z.norm_sqr()) * c.area)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Σ_σ τ_σ |D_σ y|²` over all faces, boundary included.
pub fn h1_seminorm_sq(field: &ComplexField, mesh: &Mesh) -> Result<f64> {
    field.check_mesh(mesh)?;
    mesh.require_transmissibilities()?;
    let terms: Vec<f64> = mesh
        .faces()
        .iter()
        .map(|f| f.transmissibility * d_sigma(&field.values, f).norm_sqr())
        .collect();
    Ok(pairwise_sum(&terms))
}

pub fn discrete_l2_norm(field: &ComplexField, mesh: &Mesh) -> Result<f64> {
    Ok(cell_sum(field, mesh, |s| s)?.sqrt())
}

pub fn discrete_h1_norm(field: &ComplexField, mesh: &Mesh) -> Result<f64> {
    Ok(h1_seminorm_sq(field, mesh)?.sqrt())
}

/// `(Σ_K |y_K|^{2p} m(K))^{1/(2p)}`.
pub fn discrete_l2p_norm(field: &ComplexField, mesh: &Mesh, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(cell_sum(field, mesh, |s| s.powf(p))?.powf(1.0 / (2.0 * p)))
}

pub fn max_modulus(field: &ComplexField) -> f64 {
    field.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mass `E₀ = ½ Σ_K |y_K|² m(K)`.
pub fn mass_e0(field: &ComplexField, mesh: &Mesh) -> Result<f64> {
    Ok(0.5 * cell_sum(field, mesh, |s| s)?)
}

/// Energy `E₁ = ½ Σ_σ τ_σ |D_σ y|² + Σ_K |y_K|^{2p} m(K) / (2p)`.
pub fn energy_e1(field: &ComplexField, mesh: &Mesh, p: f64) -> Result<f64> {
    check_p(p)?;
    let grad = h1_seminorm_sq(field, mesh)?;
    let pot = cell_sum(field, mesh, |s| s.powf(p))?;
    Ok(0.5 * grad + pot / (2.0 * p))
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("exponent p must be positive, got {p}")))
    }
}

/// Every monitored quantity at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub step: usize,
    pub t: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    pub l2: f64,
    pub h1: f64,
    pub l2p: f64,
    pub linf: f64,
    pub picard_iters: usize,
    pub krylov_iters: usize,
}

impl FunctionalSample {
    pub fn measure(field: &ComplexField, mesh: &Mesh, p: f64, step: usize, t: f64) -> Result<Self> {
        let l2sq = cell_sum(field, mesh, |s| s)?;
        let pot = cell_sum(field, mesh, |s| s.powf(p))?;
        let grad = h1_seminorm_sq(field, mesh)?;
        check_p(p)?;
        Ok(FunctionalSample {
            step,
            t,
            e0: 0.5 * l2sq,
            e1: 0.5 * grad + pot / (2.0 * p),
            l2: l2sq.sqrt(),
            h1: grad.sqrt(),
            l2p: pot.powf(1.0 / (2.0 * p)),
            linf: max_modulus(field),
            picard_iters: 0,
            krylov_iters: 0,
        })
    }
}
