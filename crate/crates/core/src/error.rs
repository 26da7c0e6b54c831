use thiserror::Error;

use crate::lp::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("LP solver stopped with status {status:?} after {iterations} iterations: {detail}")]
    Solver {
        status: SolveStatus,
        iterations: usize,
        detail: String,
    },

    #[error("root finding failed: {0}")]
    Convergence(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Validates an acceptance probability.
pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        domain(format!("acceptance probability {p} outside (0, 1]"))
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        domain("candidate count must be at least 1")
    } else {
        Ok(())
    }
}
