use thiserror::Error;

/// Errors produced by the library and mapped to CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("need at least {needed} rows for {cols} columns, got {rows}")]
    TooFewRows {
        rows: usize,
        cols: usize,
        needed: usize,
    },

    #[error("matrix is not symmetric: |A[{row},{col}] - A[{col},{row}]| = {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigenvalue {value:e} is below the tolerance -1e-12; input is not positive semi-definite")]
    NegativeEigenvalue { value: f64 },

    #[error("covariance eigenvalues are not distinct: relative gap {gap:e} is below {tolerance:e}")]
    AssumptionViolated { gap: f64, tolerance: f64 },

    #[error("target matrix has zero Frobenius norm")]
    ZeroTarget,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}: row {row}, column {col}: {message}")]
    CsvParse {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    CsvFormat { path: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every simulation cell failed")]
    AllCellsFailed,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code taxonomy used by the CLI so shell pipelines can branch
    /// on the failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CsvParse { .. } | Error::CsvFormat { .. } | Error::InvalidConfig(_) => 2,
            Error::TooFewRows { .. } => 3,
            Error::AssumptionViolated { .. } => 4,
            Error::AllCellsFailed => 5,
            Error::DimensionMismatch { .. } => 6,
            _ => 1,
        }
    }
}
