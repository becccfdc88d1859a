use super::AProjector;
use crate::linalg::{gen_eig_dense, DenseMatrix, SymOperator};

/// `κ_k = √λ̂_max` of the pencil `(M_Φ, M_Ψ)`; infinite when `P_AΦ^(k)` is
/// numerically rank deficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Kappa {
    pub value: f64,
    pub diagnostic: Option<String>,
}

impl Kappa {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `λ̂_max` above which `P_AΦ` is treated as numerically rank deficient:
/// some `y` then has `‖P_A y‖²_M < 1e-12·‖y‖²_M`, below the rounding floor
/// of the Gram matrices.
const RANK_DEFICIENT_RATIO: f64 = 1e12;

fn kappa_from_grams(m_phi: &DenseMatrix, m_psi: &DenseMatrix) -> Kappa {
    match gen_eig_dense(m_phi, m_psi) {
        Ok(s) => {
            let top = s.values.last().copied().unwrap_or(0.0).max(0.0);
            if top > RANK_DEFICIENT_RATIO {
                return Kappa {
                    value: f64::INFINITY,
                    diagnostic: Some(format!("numerically rank-deficient projection P_A·Phi (lambda_max = {top:e})")),
                };
            }
            Kappa {
                value: top.sqrt(),
                diagnostic: None,
            }
        }
        Err(e) => Kappa {
            value: f64::INFINITY,
            diagnostic: Some(format!("rank-deficient projection P_A·Phi ({e})")),
        },
    }
}

fn grams<M: SymOperator + ?Sized>(phi: &DenseMatrix, proj: &AProjector, m: &M) -> (DenseMatrix, DenseMatrix) {
    let psi = proj.apply(phi);
    let mut m_phi = phi.t_matmul(&m.apply_block(phi));
    let mut m_psi = psi.t_matmul(&m.apply_block(&psi));
    m_phi.symmetrize();
    m_psi.symmetrize();
    (m_phi, m_psi)
}

/// `κ` for the span of all columns of `phi`.
pub fn compute_kappa<M: SymOperator + ?Sized>(phi: &DenseMatrix, proj: &AProjector, m: &M) -> Kappa {
    let (m_phi, m_psi) = grams(phi, proj, m);
    kappa_from_grams(&m_phi, &m_psi)
}

/// `κ_1, …, κ_K` for the leading column sets of `phi` (n×K).
pub fn compute_kappas<M: SymOperator + ?Sized>(phi: &DenseMatrix, proj: &AProjector, m: &M) -> Vec<Kappa> {
    let (m_phi, m_psi) = grams(phi, proj, m);
    (1..=phi.cols())
        .map(|k| kappa_from_grams(&m_phi.leading_block(k), &m_psi.leading_block(k)))
        .collect()
}
