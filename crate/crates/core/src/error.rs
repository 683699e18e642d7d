use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("degenerate mean: {0}")]
    DegenerateMean(String),

    #[error("no real solution: discriminant {discriminant:.6e} is negative")]
    NoRealSolution { discriminant: f64 },

    #[error("non-finite loss value {value} at {context}")]
    NonFinite { value: f64, context: String },

    #[error("optimization failed: all {starts} starts diverged")]
    OptimizationFailed {
        starts: usize,
        /// Per-start loss traces up to the point of divergence.
        traces: Vec<Vec<f64>>,
    },

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::DegenerateMean(_)
                | Error::NoRealSolution { .. }
                | Error::NonFinite { .. }
                | Error::OptimizationFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
