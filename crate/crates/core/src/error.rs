use thiserror::Error;

pub type Result<T> = std::result::Result<T, BpdError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BpdError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("field too small: need {needed} distinct points, GF(16) has {available}")]
    FieldTooSmall { needed: usize, available: usize },

    #[error("insufficient data: need {needed} positions, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("selected positions do not form an invertible system")]
    Singular,

    #[error("no valid lambda in GF(16^{m}) after {tried} candidates")]
    NoValidLambda { m: usize, tried: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("repair produced a wrong symbol for node {node}")]
    RepairMismatch { node: usize },
}
