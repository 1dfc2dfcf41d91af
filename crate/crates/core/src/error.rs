use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{algorithm} did not converge within {iterations} iterations")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
    },

    #[error("linear system is singular to working precision (numerical rank {rank} of {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("certificate matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("value {re}{im:+}j is not an eigenvalue of the analysed spectrum")]
    NotInSpectrum { re: f64, im: f64 },

    #[error("no kappa in [0, 1) exists for eigenvalue {re}{im:+}j (real part >= 1)")]
    NoKappa { re: f64, im: f64 },

    #[error("similarity transform is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("operator does not belong to class {class}")]
    NotInClass { class: &'static str },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
