use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// Invalid or non-finite input data.
    #[error("data validation: {0}")]
    DataValidation(String),

    /// A matrix that must be positive definite is not.
    #[error("not positive definite{}: {msg}", pivot.map(|i| format!(" (pivot {i})")).unwrap_or_default())]
    Definiteness { pivot: Option<usize>, msg: String },

    /// Incompatible shapes or an index out of range.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An iterative solver ran out of its iteration budget.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Penalty calibration cannot be carried out on this input.
    #[error("calibration: {0}")]
    Calibration(String),

    /// A quantity left its mathematical domain (e.g. log of a nonpositive value).
    #[error("domain: {0}")]
    Domain(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::DataValidation(msg.into())
    }
}
