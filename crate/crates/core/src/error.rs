use std::path::PathBuf;

use thiserror::Error;

use crate::engine::RunDiagnostics;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, non-finite
    /// coordinates, invalid settings, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model too close to singular for the requested residual (e.g. a
    /// homography whose inverse is needed for the backward transfer).
    #[error("singular model")]
    SingularModel,

    /// A sample that does not determine a model (coincident points,
    /// collinear configurations, rank-deficient systems).
    #[error("degenerate sample")]
    DegenerateSample,

    /// Fewer points than the solver or the engine needs.
    #[error("insufficient data: need ≥ {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// A caller violated an API contract that is checked at runtime
    /// (e.g. a non-submodular pairwise term).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The exhaustive oracle refuses graphs it cannot enumerate.
    #[error("oracle scale exceeded: {nodes} nodes, limit {limit}")]
    OracleScaleExceeded { nodes: usize, limit: usize },

    /// Every hypothesis was degenerate; the run produced no model.
    #[error("no model found after {} samples", .0.samples_drawn)]
    NoModelFound(Box<RunDiagnostics>),

    /// A dataset file failed to parse; `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An I/O failure, with the offending path attached.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
