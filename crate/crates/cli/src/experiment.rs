//! Offline basis construction, test sweeps and bound reports for one
//! configured experiment.

use std::time::Instant;

use rayon::prelude::*;
use rbeig_core::analysis::{
    correlation_matrix, partition_spectrum, projection_errors, verify_bounds, BoundOptions, BoundReport,
    CorrelationMatrix,
};
use rbeig_core::eigsolve::SolverOptions;
use rbeig_core::fem::problems::builtin;
use rbeig_core::fem::{assemble_affine_terms, build_mesh, Mesh, MeshSpec, ParametricProblem};
use rbeig_core::rom::{
    build_basis, collect_snapshots, project_affine, project_operators, solve_full_order, solve_reduced,
    FullOrderSolution, ReducedAffine, ReducedBasis, RomError, Snapshots,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: ParametricProblem,
    pub mesh: Mesh,
}

pub struct Offline {
    pub basis: ReducedBasis,
    pub snapshots: Snapshots,
    pub seconds: f64,
}

/// FOM reference and ROM approximation at one test parameter.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub lambda: Vec<f64>,
    pub lambda_tilde: Vec<f64>,
    /// `ε_k` for the leading `p` eigenvectors.
    pub eps: Vec<f64>,
    pub correlation: CorrelationMatrix,
    pub fom_seconds: f64,
    pub rom_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub mu: Vec<f64>,
    pub result: Result<SweepPoint, String>,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub p: usize,
    pub entries: Vec<SweepEntry>,
}

impl Sweep {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.result.is_err()).count()
    }

    fn points(&self) -> impl Iterator<Item = &SweepPoint> {
        self.entries.iter().filter_map(|e| e.result.as_ref().ok())
    }

    /// Largest `|λ̃_k − λ_k|` over the grid.
    pub fn max_eigval_error(&self, k: Option<usize>) -> f64 {
        self.points()
            .flat_map(|p| {
                p.lambda
                    .iter()
                    .zip(&p.lambda_tilde)
                    .enumerate()
                    .filter(move |(i, _)| k.is_none_or(|k| *i == k))
                    .map(|(_, (l, lt))| (lt - l).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Largest `ε_k` over the grid, for one index or all.
    pub fn max_eigvec_error(&self, k: Option<usize>) -> f64 {
        self.points()
            .flat_map(|p| {
                p.eps
                    .iter()
                    .enumerate()
                    .filter(move |(i, _)| k.is_none_or(|k| *i == k))
                    .map(|(_, e)| *e)
            })
            .fold(0.0, f64::max)
    }
}

/// Online reduced operators: affine when the problem has a decomposition,
/// projection of the assembled pencil otherwise.
enum Reducer {
    Affine(ReducedAffine),
    Direct,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Experiment, CliError> {
        config.validate()?;
        let problem = builtin(&config.problem).map_err(CliError::Mesh)?;
        let mesh = build_mesh(&MeshSpec {
            domain: problem.domain.clone(),
            h: config.h,
            element_order: config.element_order,
        })
        .map_err(CliError::Mesh)?;
        Ok(Experiment { config, problem, mesh })
    }

    fn solver(&self, block_size: usize) -> SolverOptions {
        SolverOptions {
            block_size,
            ..self.config.solver.clone()
        }
    }

    /// Lowest `block_size` FOM eigenpairs at `mu`.
    pub fn fom(&self, mu: &[f64], block_size: usize) -> Result<FullOrderSolution, CliError> {
        self.config.check_mu(mu)?;
        Ok(solve_full_order(&self.problem, &self.mesh, mu, &self.solver(block_size))?)
    }

    pub fn offline(&self) -> Result<Offline, CliError> {
        let start = Instant::now();
        let snapshots = collect_snapshots(
            &self.problem,
            &self.mesh,
            &self.config.train,
            self.config.p,
            &self.solver(self.config.p),
        )?;
        let basis = build_basis(&snapshots)?;
        Ok(Offline {
            basis,
            snapshots,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn check_basis(&self, basis: &ReducedBasis, p: usize) -> Result<(), CliError> {
        let n = self.mesh_dofs()?;
        if basis.dim() != n {
            return Err(CliError::BasisMismatch {
                expected: n,
                found: basis.dim(),
            });
        }
        if basis.rank() < p {
            return Err(CliError::BasisTooSmall { r: basis.rank(), p });
        }
        Ok(())
    }

    /// Number of unknowns after Dirichlet elimination.
    pub fn mesh_dofs(&self) -> Result<usize, CliError> {
        let mu = self.problem.params.center();
        Ok(rbeig_core::fem::dof_map(&self.problem, &self.mesh, &mu).len())
    }

    fn reducer(&self, basis: &ReducedBasis) -> Result<Reducer, CliError> {
        if self.problem.affine.is_none() {
            return Ok(Reducer::Direct);
        }
        let terms = assemble_affine_terms(&self.problem, &self.mesh).map_err(RomError::from)?;
        Ok(Reducer::Affine(project_affine(&terms, basis)?))
    }

    fn sweep_point(&self, basis: &ReducedBasis, reducer: &Reducer, mu: &[f64]) -> Result<SweepPoint, RomError> {
        let p = self.config.p;
        let start = Instant::now();
        let fom = solve_full_order(&self.problem, &self.mesh, mu, &self.solver(p))?;
        let fom_seconds = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let ops = match reducer {
            Reducer::Affine(aff) => aff.reduce_at(mu),
            Reducer::Direct => project_operators(&fom.system.a, &fom.system.m, basis)?,
        };
        let red = solve_reduced(&ops, basis)?;
        let rom_seconds = start.elapsed().as_secs_f64();

        let sol = &fom.output.solution;
        let partition = partition_spectrum(&sol.values, self.config.partition_tol);
        let eps = projection_errors(&sol.vectors, &partition, &red.phi_tilde, &fom.system.m);
        let correlation = correlation_matrix(&sol.vectors, &red.phi_tilde, &fom.system.m, &partition);
        Ok(SweepPoint {
            lambda: sol.values.clone(),
            lambda_tilde: red.values[..p].to_vec(),
            eps,
            correlation,
            fom_seconds,
            rom_seconds,
        })
    }

    /// FOM and ROM at every test parameter, in parallel. Per-parameter
    /// failures are kept as entries; the sweep continues.
    pub fn sweep(&self, basis: &ReducedBasis) -> Result<Sweep, CliError> {
        self.check_basis(basis, self.config.p)?;
        let reducer = self.reducer(basis)?;
        let entries = self
            .config
            .test
            .par_iter()
            .map(|mu| SweepEntry {
                mu: mu.clone(),
                result: self.sweep_point(basis, &reducer, mu).map_err(|e| e.to_string()),
            })
            .collect();
        Ok(Sweep {
            p: self.config.p,
            entries,
        })
    }

    /// Eigenvalue and eigenvector bounds at `mu` for all `r` reduced pairs.
    pub fn bounds(&self, basis: &ReducedBasis, mu: &[f64]) -> Result<BoundReport, CliError> {
        self.check_basis(basis, 1)?;
        let r = basis.rank();
        let fom = self.fom(mu, r)?;
        let ops = project_operators(&fom.system.a, &fom.system.m, basis)?;
        let red = solve_reduced(&ops, basis)?;
        let opts = BoundOptions {
            partition_tol: self.config.partition_tol,
            slack: self.config.slack,
            shift: self.config.auto_shift,
        };
        Ok(verify_bounds(
            &fom.system.a,
            &fom.system.m,
            &fom.output.solution,
            &basis.q,
            &red.values,
            &red.phi_tilde,
            mu,
            &opts,
        )?)
    }
}
