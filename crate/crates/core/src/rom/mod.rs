//! Reduced-basis construction and the online projected eigensolve.
//!
//! Offline: FOM eigenvectors at training parameters are stacked into a
//! snapshot matrix whose thin QR factor is the Euclidean-orthonormal basis
//! `Q`. Online: `(QᵀAQ, QᵀMQ)` is solved densely and lifted back by `Q`.

mod basis;
mod reduced;
mod snapshots;

pub use basis::{ReducedBasis, BASIS_MAGIC};
pub use reduced::{
    project_affine, project_operators, solve_reduced, ReducedAffine, ReducedOperators, ReducedSolution,
    SYMMETRY_TOL,
};
pub use snapshots::{build_basis, collect_snapshots, solve_full_order, FullOrderSolution, Snapshots};

use thiserror::Error;

use crate::eigsolve::EigsolveError;
use crate::fem::FemError;
use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum RomError {
    #[error("full-order solve failed at mu = {mu:?}: {source}")]
    Solve {
        mu: Vec<f64>,
        #[source]
        source: EigsolveError,
    },
    #[error("no training parameters or empty snapshot matrix")]
    EmptySnapshots,
    #[error("DOF count differs between training parameters ({expected} vs {found})")]
    InconsistentDofs { expected: usize, found: usize },
    #[error("projected {which} deviates from symmetry by {deviation:e}")]
    Asymmetric { which: &'static str, deviation: f64 },
    #[error("malformed basis file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
