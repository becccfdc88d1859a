//! Dense and sparse symmetric linear algebra.

mod cholesky;
mod dense;
mod eigen;
pub mod io;
mod qr;
mod sparse;
mod weighted;

pub use cholesky::{cholesky, cholesky_solve, solve_lower_in_place, solve_lower_transpose_in_place, BandedCholesky};
pub use dense::{dot, norm2, DenseMatrix};
pub use eigen::{
    column_norms, gen_eig_dense, max_principal_angle, reduce_to_standard, residuals, sym_eig_dense, EigenSolution,
    Metric,
};
pub use qr::{qr_thin, ThinQr, QR_RANK_TOL};
pub use sparse::SparseSymMatrix;
pub use weighted::{weighted_dot, weighted_norm};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("index ({row}, {col}) out of bounds for dimension {n}")]
    IndexOutOfBounds { row: usize, col: usize, n: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("weighted norm squared is negative ({value:e}); weight is not positive semidefinite")]
    NegativeNormSquared { value: f64 },
}

/// A symmetric linear operator that can be applied to vectors and blocks.
pub trait SymOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// Applies the operator to every column of `x`.
    fn apply_block(&self, x: &DenseMatrix) -> DenseMatrix;

    /// Maximum absolute column sum.
    fn norm1(&self) -> f64;
}

impl SymOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn apply_block(&self, x: &DenseMatrix) -> DenseMatrix {
        self.matmul(x)
    }

    fn norm1(&self) -> f64 {
        DenseMatrix::norm1(self)
    }
}

impl SymOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        SparseSymMatrix::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn apply_block(&self, x: &DenseMatrix) -> DenseMatrix {
        self.mul_dense(x)
    }

    fn norm1(&self) -> f64 {
        SparseSymMatrix::norm1(self)
    }
}
