use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} cap exceeded: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid space descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid fundamental function: {0}")]
    InvalidFundamentalFunction(String),

    #[error("linear program infeasible: {0}")]
    LpInfeasible(String),

    #[error("linear program failed to converge after {0} pivots")]
    LpNoConvergence(usize),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("construction infeasible: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
