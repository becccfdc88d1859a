use super::AnalysisError;
use crate::linalg::{cholesky, cholesky_solve, dot, DenseMatrix, LinalgError, SymOperator};

/// `R_{A,M}(x) = xᵀAx / xᵀMx`.
pub fn rayleigh_quotient<A: SymOperator + ?Sized, M: SymOperator + ?Sized>(
    a: &A,
    m: &M,
    x: &[f64],
) -> Result<f64, AnalysisError> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(AnalysisError::ZeroVector);
    }
    Ok(dot(x, &a.apply(x)) / dot(x, &m.apply(x)))
}

/// Oblique projector `P_A = QÂ⁻¹QᵀA` onto `span(Q)`, `Â = QᵀAQ`.
///
/// Stores `AQ` and the Cholesky factor of `Â`, so applying it needs no
/// further products with `A`.
#[derive(Clone, Debug)]
pub struct AProjector {
    q: DenseMatrix,
    aq: DenseMatrix,
    l: DenseMatrix,
}

impl AProjector {
    /// Fails with `NotPositiveDefinite` when `Â` is not SPD, which happens
    /// when `A` has negative spectrum not removed by a shift.
    pub fn new<A: SymOperator + ?Sized>(a: &A, q: &DenseMatrix) -> Result<Self, LinalgError> {
        let aq = a.apply_block(q);
        let mut a_hat = q.t_matmul(&aq);
        a_hat.symmetrize();
        let l = cholesky(&a_hat)?;
        Ok(AProjector { q: q.clone(), aq, l })
    }

    /// Reduced coordinates `Â⁻¹QᵀAX`.
    pub fn coefficients(&self, x: &DenseMatrix) -> DenseMatrix {
        cholesky_solve(&self.l, &self.aq.t_matmul(x))
    }

    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        self.q.matmul(&self.coefficients(x))
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.q
    }
}

/// `P_A X` for a one-off application.
pub fn oblique_project_a<A: SymOperator + ?Sized>(
    q: &DenseMatrix,
    a: &A,
    x: &DenseMatrix,
) -> Result<DenseMatrix, LinalgError> {
    Ok(AProjector::new(a, q)?.apply(x))
}

/// `Φ̃Φ̃ᵀMX`: the `M`-orthogonal projection onto the span of the
/// `M`-orthonormal columns of `phi`.
pub fn m_project<M: SymOperator + ?Sized>(phi: &DenseMatrix, m: &M, x: &DenseMatrix) -> DenseMatrix {
    phi.matmul(&phi.t_matmul(&m.apply_block(x)))
}
