use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid weight {value} at cell {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("total mass {0} exceeds 1")]
    MassExceedsOne(f64),

    #[error("table is not normalized (total mass {0})")]
    NotNormalized(f64),

    #[error("reference distribution vanishes at z = {z} where the source has mass")]
    ReferenceSupport { z: usize },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("size {size} exceeds cap {cap}")]
    Size { size: u128, cap: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
