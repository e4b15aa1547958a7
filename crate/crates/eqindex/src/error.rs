use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("no matrix elements for `{0}`")]
    MissingMatrixElements(String),
    #[error("unknown group element `{0}`")]
    UnknownElement(String),
    #[error("degenerate sample grid: {0}")]
    DegenerateGrid(String),
    #[error("invalid model input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] eqindex_core::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;
