//! A-priori certification of reduced eigenpairs: oblique projectors, the
//! amplification factors `κ_k`, spectral partitions with gap factors `τ_j`,
//! eigenvector errors and the two-sided bound checks.

mod bounds;
mod errors;
mod kappa;
mod partition;
mod projector;

pub use bounds::{verify_bounds, BoundOptions, BoundReport, BoundRow, DEFAULT_BOUND_SLACK};
pub use errors::{
    check_group, correlation_matrix, eigvec_errors, projection_errors, CorrelationMatrix, EigvecError,
};
pub use kappa::{compute_kappa, compute_kappas, Kappa};
pub use partition::{compute_tau, partition_spectrum, SpectralPartition, Tau, DEFAULT_PARTITION_TOL};
pub use projector::{m_project, oblique_project_a, rayleigh_quotient, AProjector};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("Rayleigh quotient of the zero vector")]
    ZeroVector,
    #[error("group {group} covers every reduced index; the gap factor is undefined")]
    EmptyComplement { group: usize },
    #[error("eigenvalue group {group} (indices {first}..={last}) has no matching reduced cluster: {reason}")]
    GroupMismatch {
        group: usize,
        first: usize,
        last: usize,
        reason: String,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
