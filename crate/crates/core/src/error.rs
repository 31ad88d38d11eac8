use thiserror::Error;

/// Failures while reading exact numbers, matrices, or certificate files.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("bad number: {0}")]
    Number(String),
    #[error("bad matrix: {0}")]
    Matrix(String),
    #[error("bad json: {0}")]
    Json(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("projection inconsistent")]
    ProjectionInconsistent,
    #[error("cone check failed: {0}")]
    ConeCheck(String),
    #[error("solve failed: {0}")]
    SolveFailed(String),
    #[error("certification failed after {rounds} rounds: {last}")]
    CertificationExhausted { rounds: usize, last: String },
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
