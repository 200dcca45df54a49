use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pole: {0}")]
    InvalidPole(String),

    #[error("order {order} out of range for a pole of order {pole_order}")]
    OrderOutOfRange { order: usize, pole_order: usize },

    #[error("time evolution is only defined for t >= 0, got {0}")]
    NegativeTime(String),

    #[error("coefficient index ({row}, {col}) out of range: {reason}")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("dimension tags are not homogeneous: {0}")]
    DimensionMismatch(String),

    #[error("S-matrix evaluated at its pole z_R")]
    EvaluationAtPole,

    #[error("invalid S-matrix model: {0}")]
    InvalidModel(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
