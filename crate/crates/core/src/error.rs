use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("symmetric eigensolver did not converge on a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("stepsize {beta:e} exceeds the majorization bound {bound:e}")]
    Stepsize { beta: f64, bound: f64 },

    #[error("iterate diverged at iteration {iter}: non-finite entry in agent {agent}")]
    Divergence { iter: usize, agent: usize },

    #[error("parameter regime violated: {0}")]
    Regime(String),

    #[error("noise record unavailable: {0}")]
    MissingNoise(String),

    #[error("malformed CSV {path}: {msg}")]
    Csv { path: PathBuf, msg: String },

    #[error("no grid point met the accuracy band: {0}")]
    BandNotMet(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::DimensionMismatch(_)
            | Error::Disconnected(_)
            | Error::Regime(_)
            | Error::MissingNoise(_)
            | Error::Csv { .. }
            | Error::Json(_)
            | Error::Stepsize { .. } => 2,
            Error::Divergence { .. } => 3,
            Error::BandNotMet(_) => 4,
            Error::EigenFailure(_) | Error::Io(_) => 1,
        }
    }
}
