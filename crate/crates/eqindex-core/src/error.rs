use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ambient dimension {0} exceeds the supported maximum {max}", max = crate::graded_algebra::MAX_DIM)]
    DimensionTooLarge(usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("supertrace requires even dimension, got {0}")]
    OddDimension(usize),
    #[error("invalid stratum dimension {a} for ambient dimension {n}")]
    InvalidStratumDim { a: usize, n: usize },
    #[error("rotation angle outside (0, pi]: {0}")]
    AngleOutOfRange(String),
    #[error("normal action has eigenvalue 1; fixed-point set is not transversal")]
    SingularNormal,
    #[error("scalar part outside the domain of {0}")]
    Branch(&'static str),
    #[error("value not representable in exact arithmetic: {0}")]
    Inexact(&'static str),
    #[error("matrix entries must be even-degree forms")]
    OddEntry,
    #[error("curvature matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("t must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("symbol term with non-negative heat power has no kernel: {0}")]
    NonIntegrable(String),
    #[error("not enough homogeneous layers: need depth {need}, have {have}")]
    InsufficientLayers { need: usize, have: usize },
    #[error("operator leading symbol is not the flat Laplacian")]
    NonFlatLeading,
    #[error("missing function jet `{0}`")]
    MissingJet(String),
    #[error("group word: {0}")]
    Word(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
