use thiserror::Error;

use crate::hom::fit::DipFit;

/// Errors produced by the simulation engines and the run driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("channel index {index} out of range for a grid of {mode_count} modes")]
    ChannelOutOfRange { index: usize, mode_count: usize },

    #[error("both SSMMs must share the same spectral mode grid")]
    MismatchedGrids,

    #[error("stations A and B must use the same temporal envelope")]
    MismatchedEnvelopes,

    #[error("empty sweep range: {0}")]
    EmptyRange(String),

    #[error("visibility undefined: distinguishable coincidence count is zero")]
    UndefinedVisibility,

    #[error("Gaussian dip fit did not converge after {iterations} iterations (residual norm {})", .best.residual_norm)]
    FitDidNotConverge { iterations: usize, best: Box<DipFit> },

    #[error("Fock truncation bound exceeded: Poisson tail {tail:.3e} above {limit:.1e} (mean {mean}, n_max {n_max})")]
    TruncationExceeded { mean: f64, n_max: usize, tail: f64, limit: f64 },

    #[error("constraint violated: {what} (limit {limit})")]
    ConstraintViolation { what: String, limit: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("oracle validation failed: {0}")]
    OracleValidation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Process exit status: 2 for configuration problems, 3 for violated
    /// physical constraints, 4 for failed oracle checks, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::InvalidParameter { .. }
            | Error::ChannelOutOfRange { .. }
            | Error::MismatchedGrids
            | Error::MismatchedEnvelopes
            | Error::EmptyRange(_) => 2,
            Error::ConstraintViolation { .. } => 3,
            Error::OracleValidation(_) => 4,
            _ => 1,
        }
    }
}
