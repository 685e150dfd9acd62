use thiserror::Error;

use crate::matrix::MatrixSubspaceBasis;

/// Errors raised by landscape computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The modulus fidelity is not differentiable where tr(W†U) vanishes.
    #[error("non-smooth point: |tr(W†U)| = {modulus:e} is below {threshold:e}")]
    NonSmooth { modulus: f64, threshold: f64 },

    #[error("refinement did not converge in [{lo}, {hi}]")]
    Refinement { lo: f64, hi: f64 },

    #[error("Lie closure did not stabilize after {rounds} rounds (dimension {})", partial.len())]
    ClosureNotStable {
        rounds: usize,
        partial: Box<MatrixSubspaceBasis>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Json(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
