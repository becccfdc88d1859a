//! Iterative solution of the sparse full-order pencil.

mod lobpcg;
mod shift;

pub use lobpcg::{lobpcg, relative_residuals, LobpcgOutput, Preconditioner, SolverOptions};
pub use shift::{probe_positive_definite, shift_for, spd_shift, Shifted};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigsolveError {
    #[error("LOBPCG did not converge in {iterations} iterations (max relative residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
        max_residual: f64,
    },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
