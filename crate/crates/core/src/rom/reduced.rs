use super::{ReducedBasis, RomError};
use crate::fem::{AffineForm, AffineOperators};
use crate::linalg::{gen_eig_dense, DenseMatrix, SymOperator};

/// Asymmetry tolerated in a projected operator before averaging, relative
/// to the larger of its largest entry and `‖op‖₁`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `Â = QᵀAQ` and `M̂ = QᵀMQ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedOperators {
    pub a_hat: DenseMatrix,
    pub m_hat: DenseMatrix,
}

/// Projected affine terms `QᵀA_qQ`, `QᵀM_qQ` with their coefficient functions.
#[derive(Clone)]
pub struct ReducedAffine {
    pub a_terms: Vec<DenseMatrix>,
    pub m_terms: Vec<DenseMatrix>,
    pub form: AffineForm,
}

impl ReducedAffine {
    /// `(Σθ_q(μ)Â_q, Σθ_q(μ)M̂_q)` using only r×r work.
    pub fn reduce_at(&self, mu: &[f64]) -> ReducedOperators {
        ReducedOperators {
            a_hat: combine(&self.a_terms, &self.form.theta_a(mu)),
            m_hat: combine(&self.m_terms, &self.form.theta_m(mu)),
        }
    }
}

fn combine(terms: &[DenseMatrix], theta: &[f64]) -> DenseMatrix {
    let r = terms[0].rows();
    let mut out = DenseMatrix::zeros(r, r);
    for (t, &c) in terms.iter().zip(theta) {
        out.add_scaled(c, t);
    }
    out
}

/// Lowest-first reduced eigenpairs and their lift `Φ̃ = QΦ̂`.
#[derive(Clone, Debug)]
pub struct ReducedSolution {
    pub values: Vec<f64>,
    /// r×r, `M̂`-orthonormal.
    pub phi_hat: DenseMatrix,
    /// n×r, `M`-orthonormal.
    pub phi_tilde: DenseMatrix,
}

fn project<A: SymOperator + ?Sized>(op: &A, q: &DenseMatrix, which: &'static str) -> Result<DenseMatrix, RomError> {
    let mut b = q.t_matmul(&op.apply_block(q));
    let deviation = b.asymmetry();
    if deviation > SYMMETRY_TOL * b.max_abs().max(op.norm1()).max(f64::MIN_POSITIVE) {
        return Err(RomError::Asymmetric { which, deviation });
    }
    b.symmetrize();
    Ok(b)
}

pub fn project_operators<A: SymOperator + ?Sized, M: SymOperator + ?Sized>(
    a: &A,
    m: &M,
    basis: &ReducedBasis,
) -> Result<ReducedOperators, RomError> {
    Ok(ReducedOperators {
        a_hat: project(a, &basis.q, "A")?,
        m_hat: project(m, &basis.q, "M")?,
    })
}

/// Offline projection of every affine term.
pub fn project_affine(ops: &AffineOperators, basis: &ReducedBasis) -> Result<ReducedAffine, RomError> {
    let a_terms = ops.a_terms.iter().map(|t| project(t, &basis.q, "A term")).collect::<Result<_, _>>()?;
    let m_terms = ops.m_terms.iter().map(|t| project(t, &basis.q, "M term")).collect::<Result<_, _>>()?;
    Ok(ReducedAffine {
        a_terms,
        m_terms,
        form: ops.form.clone(),
    })
}

/// Solves the projected pencil for all r pairs and lifts the eigenvectors.
pub fn solve_reduced(ops: &ReducedOperators, basis: &ReducedBasis) -> Result<ReducedSolution, RomError> {
    let sol = gen_eig_dense(&ops.a_hat, &ops.m_hat)?;
    Ok(ReducedSolution {
        phi_tilde: basis.q.matmul(&sol.vectors),
        values: sol.values,
        phi_hat: sol.vectors,
    })
}
