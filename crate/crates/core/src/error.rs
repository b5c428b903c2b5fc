use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} out of supported range 2..=12")]
    Dimension(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degree error: {0}")]
    Degree(String),

    #[error("shape mismatch: ({0},{1}) vs ({2},{3})")]
    Shape(usize, usize, usize, usize),

    #[error("internal consistency check failed for {what}: {lhs} vs {rhs}")]
    Inconsistent { what: String, lhs: f64, rhs: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("metric is not symmetric positive definite at {0:?}")]
    NotSpd(Vec<f64>),

    #[error("finite-difference step invalid: {0}")]
    FdStep(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-positive conformal factor {value} at {point:?}")]
    NonPositive { point: Vec<f64>, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
