use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A model-configuration document failed schema validation.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine produced non-finite or inconsistent output.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested quantity has no exact evaluation for this model.
    #[error("no exact method: {0}")]
    NoExactMethod(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
