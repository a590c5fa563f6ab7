use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Verblunsky coefficient alpha[{index}] = {value} (must lie strictly inside (-1, 1))")]
    InvalidCoefficient { index: usize, value: f64 },

    #[error("degree {requested} exceeds the {available} available coefficients")]
    DegreeTooLarge { requested: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point} is outside the domain: {reason}")]
    OutOfDomain { point: String, reason: String },

    #[error("near-diagonal kernel argument (|1 - z conj(w)| = {gap:e}); use the direct sum")]
    NearDiagonal { gap: f64 },

    #[error("moment sequence is not positive definite at index {index}")]
    NotPositiveDefinite { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: value {value}, error estimate {error:e} after {evaluations} evaluations")]
    QuadratureNotConverged {
        value: f64,
        error: f64,
        evaluations: usize,
    },
}

impl Error {
    pub(crate) fn domain(point: impl std::fmt::Display, reason: impl Into<String>) -> Self {
        Error::OutOfDomain {
            point: point.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidCoefficient { .. }
                | Error::DegreeTooLarge { .. }
                | Error::InvalidParameter(_)
                | Error::OutOfDomain { .. }
                | Error::NotPositiveDefinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
