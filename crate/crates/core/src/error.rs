use thiserror::Error;

use crate::halfline::CascadeReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// One of the standing hypotheses on the operator or the coefficients fails.
    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("point outside the operator domain: {0}")]
    Domain(String),

    #[error("tail behaviour of {0} is undeclared; global quantities need a declared tail")]
    UndeclaredTail(&'static str),

    #[error("forcing is not a member of Y: {0}")]
    YMembership(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("half-line cascade did not settle within the horizon budget (last window gap {:e})", report.last_gap())]
    CascadeDiverged { report: Box<CascadeReport> },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the input data, as opposed to solver failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::InvalidParameter(_)
                | Error::Hypothesis { .. }
                | Error::Domain(_)
                | Error::UndeclaredTail(_)
                | Error::YMembership(_)
                | Error::UnknownPreset(_)
                | Error::Json(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
