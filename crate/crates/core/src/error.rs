use thiserror::Error;

use crate::variational::SaddleCertificate;

/// Errors produced by the solvers, the instance generator and the input parsers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must have dimension n >= 1")]
    Empty,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("vector entry {index} is not strictly positive and finite: {value}")]
    NotPositive { index: usize, value: f64 },

    #[error("weights are not on the probability simplex (sum = {sum})")]
    NotOnSimplex { sum: f64 },

    #[error("matrix is not irreducible")]
    NotIrreducible,

    #[error("matrix is not nonnegative")]
    NotNonnegative,

    #[error("matrix is not Metzler (negative off-diagonal entry)")]
    NotMetzler,

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// The iterative saddle solver exhausted its budget; the best iterate is kept.
    #[error("saddle iteration did not converge within {iterations} iterations (best gap {})", best.gap)]
    SaddleNoConvergence {
        iterations: usize,
        best: Box<SaddleCertificate>,
    },

    #[error("invalid instance spec: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("matrix is not square ({rows} x {cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Empty => "Empty",
            Error::NonFinite { .. } => "NonFinite",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotOnSimplex { .. } => "NotOnSimplex",
            Error::NotIrreducible => "NotIrreducible",
            Error::NotNonnegative => "NotNonnegative",
            Error::NotMetzler => "NotMetzler",
            Error::NoConvergence { .. } | Error::SaddleNoConvergence { .. } => "NoConvergence",
            Error::InvalidInstance(_) => "InvalidInstance",
            Error::Parse { .. } => "ParseError",
            Error::NonSquare { .. } => "NonSquare",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
