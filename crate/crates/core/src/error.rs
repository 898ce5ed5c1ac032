use thiserror::Error;

pub type Result<T> = std::result::Result<T, TopoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopoError {
    #[error("invalid grid shape {height}x{width}: both sides must be at least 1")]
    InvalidShape { height: usize, width: usize },

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validity mask selects no pixels")]
    EmptyMask,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
