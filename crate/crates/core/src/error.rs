use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point has {found} components, sample space has {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domination failure: {0}")]
    Domination(String),

    #[error("unsupported sample space: {0}")]
    UnsupportedSpace(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("projection infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e}, last iterate {last:?})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
        last: Vec<f64>,
    },

    #[error("non-finite value at {location:?}")]
    NonFinite { location: Vec<f64> },

    #[error("positivity violated: treatment probability is zero at history {history:?}")]
    Positivity { history: Vec<f64> },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("law is outside the Markov model (conditional independence residual {residual:e})")]
    ModelMembership { residual: f64 },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::UnsupportedSpace(_)
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
