//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("zero has no squarefree class")]
    ZeroSquarefreeClass,
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("gram matrix is degenerate")]
    DegenerateForm,
    #[error("isotropic reflection vector")]
    IsotropicReflection,
    #[error("matrix is not an isometry of the form")]
    NotIsometry,
    #[error("contraction laplacian needs degree >= 2, got {0}")]
    DegreeTooLow(usize),
    #[error("model requires d >= 2 and n >= 1 (got d = {d}, n = {n})")]
    BadModelParams { d: usize, n: usize },
    #[error("internal model invariant failed: {0}")]
    ModelInvariant(String),
    #[error("class does not have the Lefschetz property; no sl2 completion")]
    NoSl2Completion,
    #[error("matrix is not skew with respect to the form")]
    NotSkew,
    #[error("degenerate Hodge plane: {0}")]
    DegeneratePlane(String),
    #[error("phi is not a Hodge isometry for the given planes")]
    NotHodgeIsometry,
    #[error("exterior dimension cap: n <= 2, got {0}")]
    ExteriorCap(usize),
    #[error("no spanning set of Lefschetz classes found")]
    NoLefschetzSet,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
