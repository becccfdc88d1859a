use std::ops::Range;

use super::AnalysisError;

/// Default relative tolerance for grouping numerically equal eigenvalues.
pub const DEFAULT_PARTITION_TOL: f64 = 1e-6;

/// Absolute floor for the grouping scale, so zero eigenvalues still group.
const PARTITION_FLOOR: f64 = 1e-14;

/// Relative distance below which a reduced eigenvalue coincides with `ν_j`.
const TAU_COINCIDENCE_TOL: f64 = 1e-12;

/// Grouping of an ascending spectrum into distinct values `ν_j` with
/// multiplicities `γ_j` and consecutive index sets `S_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPartition {
    /// `ν_j`: mean of each group, strictly increasing.
    pub distinct: Vec<f64>,
    /// `γ_j`.
    pub multiplicities: Vec<usize>,
    /// `Γ_j = γ_1 + … + γ_j`.
    pub cumulative: Vec<usize>,
}

impl SpectralPartition {
    pub fn num_groups(&self) -> usize {
        self.distinct.len()
    }

    /// Number of partitioned eigenvalues.
    pub fn len(&self) -> usize {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `S_j` as zero-based indices.
    pub fn index_set(&self, j: usize) -> Range<usize> {
        let start = if j == 0 { 0 } else { self.cumulative[j - 1] };
        start..self.cumulative[j]
    }

    pub fn groups(&self) -> Vec<Range<usize>> {
        (0..self.num_groups()).map(|j| self.index_set(j)).collect()
    }

    /// Group containing zero-based index `k`.
    pub fn group_of(&self, k: usize) -> Option<usize> {
        self.cumulative.iter().position(|&c| k < c)
    }
}

/// Consecutive values within `rel_tol·max(|λ_k|, |λ_{k+1}|)` share a group.
pub fn partition_spectrum(values: &[f64], rel_tol: f64) -> SpectralPartition {
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        let joins = k > 0 && {
            let prev = values[k - 1];
            (v - prev).abs() <= rel_tol * prev.abs().max(v.abs()).max(PARTITION_FLOOR)
        };
        match groups.last_mut() {
            Some(g) if joins => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let mut cumulative = Vec::with_capacity(groups.len());
    let mut total = 0;
    for g in &groups {
        total += g.len();
        cumulative.push(total);
    }
    SpectralPartition {
        distinct: groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect(),
        multiplicities: groups.iter().map(Vec::len).collect(),
        cumulative,
    }
}

/// Gap factor of one group; infinite when a complement value coincides
/// with `ν_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau {
    pub value: f64,
    pub diagnostic: Option<String>,
}

/// `τ_j = |ν_j| / min_{k ∉ S_j, k < r} |ν_j − λ̃_k|` over the reduced values.
pub fn compute_tau(partition: &SpectralPartition, j: usize, lambda_tilde: &[f64]) -> Result<Tau, AnalysisError> {
    let nu = partition.distinct[j];
    let s = partition.index_set(j);
    let gap = lambda_tilde
        .iter()
        .enumerate()
        .filter(|(k, _)| !s.contains(k))
        .map(|(_, &l)| (nu - l).abs())
        .fold(f64::INFINITY, f64::min);
    if gap == f64::INFINITY {
        return Err(AnalysisError::EmptyComplement { group: j });
    }
    if gap <= TAU_COINCIDENCE_TOL * nu.abs().max(PARTITION_FLOOR) {
        return Ok(Tau {
            value: f64::INFINITY,
            diagnostic: Some(format!("reduced eigenvalue coincides with nu_{} = {nu:e}", j + 1)),
        });
    }
    Ok(Tau {
        value: nu.abs() / gap,
        diagnostic: None,
    })
}
