use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver, the metric kernels and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} returned a non-finite value (index {index})")]
    Evaluation { what: &'static str, index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("QP sub-problem did not converge within {0} active-set iterations")]
    MaxQpIterations(usize),

    #[error("penalty update degenerate: phi* = {phi_star:e} at an infeasible point")]
    PenaltyUpdateDegenerate { phi_star: f64 },

    #[error("line search failed: step length fell below {min_alpha:e}")]
    LineSearchFailure { min_alpha: f64 },

    #[error("metric undefined: {0}")]
    MetricUndefined(&'static str),

    #[error("catalog entry {problem} failed validation: {reason}")]
    CatalogValidation { problem: String, reason: String },

    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    #[error("report error in {path}: {reason}")]
    Report { path: PathBuf, reason: String },

    #[error("malformed data in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
