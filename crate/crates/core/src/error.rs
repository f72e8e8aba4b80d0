use thiserror::Error;

use crate::conesolver::SolverStatus;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e}, allowed {allowed:e})")]
    NotPsd { min_eig: f64, allowed: f64 },
    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("index {index} out of range (max {max})")]
    InvalidIndex { index: usize, max: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid cone program: {0}")]
    InvalidProgram(String),
    #[error("invalid multiplier for constraint {index}: {reason}")]
    InvalidMultiplier { index: usize, reason: String },
    #[error("feasible set has empty interior (best margin {margin:e})")]
    EmptyInterior { margin: f64 },
    #[error("instance has the wrong shape for this operation: {0}")]
    WrongShape(String),
    #[error("exactness condition not met: {0}")]
    ConditionNotMet(String),
    #[error("failed to close the relaxation gap: {reason}")]
    TightenFailed { reason: String, remaining_gap: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("solver finished with status {status:?}")]
    Solver { status: SolverStatus },
    #[error("no feasible grid point")]
    EmptyFeasibleGrid,
    #[error("cannot infer a bounded search box: {0}")]
    UnboundedBox(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
