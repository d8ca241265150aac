use thiserror::Error;

use crate::solvers::SparseSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("every eigenvalue of A^T A is at or below the zero threshold {threshold:e}")]
    AllZeroMatrix { threshold: f64 },

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("singular system: pivot {pivot:e} below {limit:e}")]
    Singular { pivot: f64, limit: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no support of size <= {k_max} reproduces B")]
    Infeasible { k_max: usize },

    #[error("enumeration over n = {n} columns exceeds the guard {guard}")]
    EnumerationTooLarge { n: usize, guard: usize },

    #[error("no convergence after {iterations} iterations")]
    MaxIterationsExceeded {
        iterations: usize,
        last: Box<SparseSolution>,
    },

    #[error("search dimension {dim} exceeds the guard {guard}")]
    DimGuardExceeded { dim: usize, guard: usize },

    #[error("the null space of A is trivial")]
    TrivialNullspace,

    #[error("Vandermonde nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::AllZeroMatrix { .. } => "AllZeroMatrix",
            Error::RankDeficient(_) => "RankDeficient",
            Error::Singular { .. } => "Singular",
            Error::DomainError(_) => "DomainError",
            Error::Infeasible { .. } => "Infeasible",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::MaxIterationsExceeded { .. } => "MaxIterationsExceeded",
            Error::DimGuardExceeded { .. } => "DimGuardExceeded",
            Error::TrivialNullspace => "TrivialNullspace",
            Error::DuplicateNodes(..) => "DuplicateNodes",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// True for errors caused by malformed or unreadable input rather than
    /// by the computation itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::InvalidMatrix(_)
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
