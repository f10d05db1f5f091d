use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not place {requested} seed points inside the domain after {attempts} attempts")]
    Seeding { requested: usize, attempts: usize },

    #[error(
        "degenerate cell {cell}: area {area:e} below threshold {threshold:e}; try another seed"
    )]
    DegenerateCell {
        cell: usize,
        area: f64,
        threshold: f64,
    },

    #[error("zero distance while computing transmissibility of face {face}")]
    ZeroDistance { face: usize },

    #[error("face {face} has no transmissibility; call compute_transmissibilities first")]
    MissingTransmissibility { face: usize },

    #[error("field does not live on this mesh (field mesh id {field:#x}, mesh id {mesh:#x})")]
    MeshMismatch { field: u64, mesh: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mesh file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("mesh file field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: i64, expected: i64 },

    #[error("GMRES did not converge after {iters} iterations (relative residual {residual:e})")]
    KrylovNonConvergence { iters: usize, residual: f64 },

    #[error("Picard iteration did not converge after {iters} iterations (last residual {:e})", history.last().copied().unwrap_or(f64::NAN))]
    PicardNonConvergence { iters: usize, history: Vec<f64> },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("decay fit needs at least 3 samples in the window, found {0}")]
    InsufficientData(usize),

    #[error("nonpositive mass {value:e} at t = {t} inside the fit window")]
    NonpositiveMass { t: f64, value: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
