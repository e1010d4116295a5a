use thiserror::Error;

/// Errors raised by the bound calculators and the experiment front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("{what} is not Hermitian: entry ({row}, {col}) differs from its mirror by {defect:e}")]
    NotHermitian {
        what: &'static str,
        row: usize,
        col: usize,
        defect: f64,
    },

    #[error("state trace ≠ 1 (trace = {trace})")]
    TraceNotOne { trace: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("negative radicand {value:e} beyond roundoff tolerance")]
    NegativeRadicand { value: f64 },

    #[error("undefined purity estimate: both sign branches are degenerate")]
    DegenerateEstimate,

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NegativeRadicand { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
