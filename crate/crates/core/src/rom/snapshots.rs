use rayon::prelude::*;

use super::{ReducedBasis, RomError};
use crate::eigsolve::{lobpcg, LobpcgOutput, SolverOptions};
use crate::fem::{assemble, Assembled, Mesh, ParametricProblem};
use crate::linalg::{qr_thin, DenseMatrix};

/// Assembled pencil at one parameter with its lowest eigenpairs.
#[derive(Clone, Debug)]
pub struct FullOrderSolution {
    pub mu: Vec<f64>,
    pub system: Assembled,
    pub output: LobpcgOutput,
}

/// Assembles at `mu` and computes the lowest `opts.block_size` eigenpairs.
pub fn solve_full_order(
    problem: &ParametricProblem,
    mesh: &Mesh,
    mu: &[f64],
    opts: &SolverOptions,
) -> Result<FullOrderSolution, RomError> {
    let system = assemble(problem, mesh, mu)?;
    let output = lobpcg(&system.a, &system.m, opts).map_err(|source| RomError::Solve {
        mu: mu.to_vec(),
        source,
    })?;
    Ok(FullOrderSolution {
        mu: mu.to_vec(),
        system,
        output,
    })
}

/// FOM eigenvectors stacked by training point: column `ℓ·p + k` is
/// `φ_k(μ_ℓ)`, `M(μ_ℓ)`-orthonormal within each block.
#[derive(Clone, Debug)]
pub struct Snapshots {
    pub matrix: DenseMatrix,
    pub training: Vec<Vec<f64>>,
    pub pairs_per_param: usize,
    /// Lowest `p` FOM eigenvalues per training point.
    pub values: Vec<Vec<f64>>,
}

/// Solves the FOM at every training point in parallel and keeps the lowest
/// `p` eigenvectors of each.
pub fn collect_snapshots(
    problem: &ParametricProblem,
    mesh: &Mesh,
    training: &[Vec<f64>],
    p: usize,
    opts: &SolverOptions,
) -> Result<Snapshots, RomError> {
    if training.is_empty() || p == 0 {
        return Err(RomError::EmptySnapshots);
    }
    let opts = SolverOptions {
        block_size: p,
        ..opts.clone()
    };
    let results: Vec<Result<FullOrderSolution, RomError>> = training
        .par_iter()
        .map(|mu| solve_full_order(problem, mesh, mu, &opts))
        .collect();
    let mut blocks = Vec::with_capacity(training.len());
    let mut values = Vec::with_capacity(training.len());
    for r in results {
        let sol = r?;
        if let Some(first) = blocks.first().map(DenseMatrix::rows) {
            if sol.system.a.dim() != first {
                return Err(RomError::InconsistentDofs {
                    expected: first,
                    found: sol.system.a.dim(),
                });
            }
        }
        values.push(sol.output.solution.values);
        blocks.push(sol.output.solution.vectors);
    }
    let refs: Vec<&DenseMatrix> = blocks.iter().collect();
    Ok(Snapshots {
        matrix: DenseMatrix::hstack(&refs),
        training: training.to_vec(),
        pairs_per_param: p,
        values,
    })
}

/// Thin QR of the snapshot matrix with rank truncation.
pub fn build_basis(snapshots: &Snapshots) -> Result<ReducedBasis, RomError> {
    let s = &snapshots.matrix;
    if s.cols() == 0 || s.max_abs() == 0.0 {
        return Err(RomError::EmptySnapshots);
    }
    let qr = qr_thin(s);
    Ok(ReducedBasis {
        truncated: s.cols() - qr.rank,
        q: qr.q,
        training: snapshots.training.clone(),
        pairs_per_param: snapshots.pairs_per_param,
    })
}
