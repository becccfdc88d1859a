use std::ops::Range;

use super::{m_project, AProjector, AnalysisError, SpectralPartition};
use crate::linalg::{DenseMatrix, SymOperator};

/// `ε_k = ‖(I − P̃_M^{S_j})φ_k‖_M` and `δ_k = ‖(I − P_A)φ_k‖_M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigvecError {
    pub eps: f64,
    pub delta: f64,
}

/// Checks that the reduced values indexed by `S_j` form a cluster of their
/// own: they must all exist and lie closer to each other than to any other
/// reduced value.
pub fn check_group(partition: &SpectralPartition, j: usize, lambda_tilde: &[f64]) -> Result<(), AnalysisError> {
    let s = partition.index_set(j);
    let mismatch = |reason: String| AnalysisError::GroupMismatch {
        group: j,
        first: s.start,
        last: s.end - 1,
        reason,
    };
    if s.end > lambda_tilde.len() {
        return Err(mismatch(format!("only {} reduced pairs", lambda_tilde.len())));
    }
    if s.len() == 1 {
        return Ok(());
    }
    let group = &lambda_tilde[s.clone()];
    let lo = group.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = group.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nearest = lambda_tilde
        .iter()
        .enumerate()
        .filter(|(k, _)| !s.contains(k))
        .map(|(_, &l)| (lo - l).max(l - hi).max(0.0))
        .fold(f64::INFINITY, f64::min);
    if nearest <= hi - lo {
        return Err(mismatch(format!(
            "reduced spread {:e} is not below the distance {nearest:e} to other reduced values",
            hi - lo
        )));
    }
    Ok(())
}

fn m_norms<M: SymOperator + ?Sized>(x: &DenseMatrix, m: &M) -> Vec<f64> {
    let mx = m.apply_block(x);
    (0..x.cols())
        .map(|k| {
            let s: f64 = (0..x.rows()).map(|i| x[(i, k)] * mx[(i, k)]).sum();
            s.max(0.0).sqrt()
        })
        .collect()
}

/// Per-index `(ε_k, δ_k)` for the `partition.len()` leading columns of `phi`.
///
/// `phi` holds `M`-orthonormal FOM eigenvectors, `phi_tilde` the lifted
/// reduced eigenvectors with values `lambda_tilde`, and `proj` the oblique
/// projector of the (shifted, SPD) stiffness onto the reduced basis.
pub fn eigvec_errors<M: SymOperator + ?Sized>(
    phi: &DenseMatrix,
    partition: &SpectralPartition,
    lambda_tilde: &[f64],
    phi_tilde: &DenseMatrix,
    m: &M,
    proj: &AProjector,
) -> Result<Vec<EigvecError>, AnalysisError> {
    for j in 0..partition.num_groups() {
        check_group(partition, j, lambda_tilde)?;
    }
    Ok(eigvec_errors_unchecked(phi, partition, phi_tilde, m, proj))
}

/// `eigvec_errors` without the cluster check on the reduced values.
pub(crate) fn eigvec_errors_unchecked<M: SymOperator + ?Sized>(
    phi: &DenseMatrix,
    partition: &SpectralPartition,
    phi_tilde: &DenseMatrix,
    m: &M,
    proj: &AProjector,
) -> Vec<EigvecError> {
    let phi = phi.leading_columns(partition.len());
    let delta = m_norms(&phi.sub(&proj.apply(&phi)), m);
    projection_errors(&phi, partition, phi_tilde, m)
        .into_iter()
        .zip(delta)
        .map(|(eps, delta)| EigvecError { eps, delta })
        .collect()
}

/// `ε_k` alone, using the index sets of `partition` on both spectra.
pub fn projection_errors<M: SymOperator + ?Sized>(
    phi: &DenseMatrix,
    partition: &SpectralPartition,
    phi_tilde: &DenseMatrix,
    m: &M,
) -> Vec<f64> {
    let mut eps = vec![0.0; partition.len()];
    for j in 0..partition.num_groups() {
        let s: Vec<usize> = partition.index_set(j).collect();
        let x = phi.select_columns(&s);
        let resid = x.sub(&m_project(&phi_tilde.select_columns(&s), m, &x));
        for (&k, e) in s.iter().zip(m_norms(&resid, m)) {
            eps[k] = e;
        }
    }
    eps
}

/// `C_km = φ̃_mᵀMφ_k` for the leading p FOM and reduced eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    pub c: DenseMatrix,
    pub groups: Vec<Range<usize>>,
}

impl CorrelationMatrix {
    /// Largest `|C_km|` with `k` and `m` in different groups.
    pub fn off_group_max_abs(&self) -> f64 {
        let p = self.c.rows();
        let group_of = |i: usize| self.groups.iter().position(|g| g.contains(&i));
        let mut worst: f64 = 0.0;
        for k in 0..p {
            for m in 0..p {
                if group_of(k) != group_of(m) {
                    worst = worst.max(self.c[(k, m)].abs());
                }
            }
        }
        worst
    }

    /// Within-group block `C[S_j, S_j]`.
    pub fn block(&self, j: usize) -> DenseMatrix {
        let g = &self.groups[j];
        DenseMatrix::from_fn(g.len(), g.len(), |a, b| self.c[(g.start + a, g.start + b)])
    }

    /// `Σ_{m ∈ S_j} C_km φ̃_m` for the group containing `k`.
    pub fn reconstruct(&self, k: usize, phi_tilde: &DenseMatrix) -> Vec<f64> {
        let g = self.groups.iter().find(|g| g.contains(&k)).expect("index outside partition");
        let mut out = vec![0.0; phi_tilde.rows()];
        for mi in g.clone() {
            let c = self.c[(k, mi)];
            for (o, i) in out.iter_mut().zip(0..phi_tilde.rows()) {
                *o += c * phi_tilde[(i, mi)];
            }
        }
        out
    }
}

pub fn correlation_matrix<M: SymOperator + ?Sized>(
    phi: &DenseMatrix,
    phi_tilde: &DenseMatrix,
    m: &M,
    partition: &SpectralPartition,
) -> CorrelationMatrix {
    let p = partition.len();
    let phi = phi.leading_columns(p);
    let phi_tilde = phi_tilde.leading_columns(p);
    CorrelationMatrix {
        c: phi.t_matmul(&m.apply_block(&phi_tilde)),
        groups: partition.groups(),
    }
}
