//! Subcommand drivers: run an experiment stage and write its CSV files.
//!
//! Numbers are written with 17 significant digits. Wall-clock timings go to
//! separate `*_timings.csv` files so the result files are reproducible
//! byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rbeig_core::analysis::BoundReport;
use rbeig_core::linalg::io::write_dense_csv;
use rbeig_core::rom::{FullOrderSolution, ReducedBasis};

use crate::error::CliError;
use crate::experiment::{Experiment, Offline, Sweep};

pub const BASIS_FILE: &str = "basis.bin";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn mu_cols(mu: &[f64]) -> String {
    mu.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

fn mu_header(dim: usize) -> String {
    if dim == 1 {
        "mu".into()
    } else {
        (1..=dim).map(|i| format!("mu{i}")).collect::<Vec<_>>().join(",")
    }
}

/// `1_0.8` style tag for per-parameter file names.
pub fn mu_tag(mu: &[f64]) -> String {
    mu.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("_")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn param_dim(exp: &Experiment) -> usize {
    exp.problem.params.dim()
}

/// Writes `fom_eigenvalues.csv` (k, lambda, residual) and, with vectors
/// enabled, `fom_eigenvectors.csv` (one row per unknown).
pub fn run_fom(exp: &Experiment, mu: &[f64]) -> Result<FullOrderSolution, CliError> {
    let fom = exp.fom(mu, exp.config.p)?;
    let out = &exp.config.out;
    let sol = &fom.output.solution;
    let mut w = create(out, "fom_eigenvalues.csv")?;
    writeln!(w, "{},k,lambda,residual", mu_header(mu.len()))?;
    for (k, (l, r)) in sol.values.iter().zip(&fom.output.relative_residuals).enumerate() {
        writeln!(w, "{},{},{},{}", mu_cols(mu), k + 1, num(*l), num(*r))?;
    }
    w.flush()?;
    if exp.config.write_vectors {
        let mut w = create(out, "fom_eigenvectors.csv")?;
        write_dense_csv(&sol.vectors, &mut w)?;
        w.flush()?;
    }
    Ok(fom)
}

/// Builds the basis and writes `basis.bin`, `offline_summary.csv`,
/// `offline_timings.csv` and, with vectors enabled, `basis.csv`.
pub fn run_offline(exp: &Experiment) -> Result<Offline, CliError> {
    let off = exp.offline()?;
    let out = &exp.config.out;
    fs::create_dir_all(out)?;
    off.basis.save(out.join(BASIS_FILE))?;

    let mut w = create(out, "offline_summary.csv")?;
    writeln!(w, "{},k,lambda,p,r,truncated", mu_header(param_dim(exp)))?;
    for (mu, values) in off.snapshots.training.iter().zip(&off.snapshots.values) {
        for (k, l) in values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                mu_cols(mu),
                k + 1,
                num(*l),
                off.basis.pairs_per_param,
                off.basis.rank(),
                off.basis.truncated
            )?;
        }
    }
    w.flush()?;

    let mut w = create(out, "offline_timings.csv")?;
    writeln!(w, "stage,seconds")?;
    writeln!(w, "offline,{}", num(off.seconds))?;
    w.flush()?;

    if exp.config.write_vectors {
        let mut w = create(out, "basis.csv")?;
        off.basis.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(off)
}

/// Loads a saved basis, or builds one with `run_offline` when no path is
/// given.
pub fn basis_for(exp: &Experiment, path: Option<&Path>) -> Result<ReducedBasis, CliError> {
    match path {
        Some(p) => Ok(ReducedBasis::load(p)?),
        None => Ok(run_offline(exp)?.basis),
    }
}

/// Writes `sweep_errors.csv`, `correlation.csv`, `sweep_timings.csv` and,
/// when some parameters failed, `sweep_diagnostics.txt`.
///
/// Returns `SweepFailures` after writing everything if any test parameter
/// failed.
pub fn run_sweep(exp: &Experiment, basis: &ReducedBasis) -> Result<Sweep, CliError> {
    let sweep = exp.sweep(basis)?;
    write_sweep(&sweep, param_dim(exp), &exp.config.out)?;
    let failed = sweep.failures();
    if failed > 0 {
        return Err(CliError::SweepFailures {
            failed,
            total: sweep.entries.len(),
        });
    }
    Ok(sweep)
}

pub fn write_sweep(sweep: &Sweep, dim: usize, out: &Path) -> Result<(), CliError> {
    let header = mu_header(dim);
    let mut errs = create(out, "sweep_errors.csv")?;
    let mut corr = create(out, "correlation.csv")?;
    let mut time = create(out, "sweep_timings.csv")?;
    writeln!(errs, "{header},k,lambda,lambda_tilde,eigval_err,eps,status")?;
    writeln!(corr, "{header},k,m,c,same_group")?;
    writeln!(time, "{header},fom_seconds,rom_seconds")?;
    let mut diagnostics = Vec::new();
    for e in &sweep.entries {
        let mu = mu_cols(&e.mu);
        match &e.result {
            Ok(pt) => {
                for k in 0..sweep.p {
                    let (l, lt) = (pt.lambda[k], pt.lambda_tilde[k]);
                    writeln!(errs, "{mu},{},{},{},{},{},ok", k + 1, num(l), num(lt), num(lt - l), num(pt.eps[k]))?;
                }
                let c = &pt.correlation;
                let group_of = |i: usize| c.groups.iter().position(|g| g.contains(&i));
                for k in 0..c.c.rows() {
                    for m in 0..c.c.cols() {
                        let same = group_of(k) == group_of(m);
                        writeln!(corr, "{mu},{},{},{},{same}", k + 1, m + 1, num(c.c[(k, m)]))?;
                    }
                }
                writeln!(time, "{mu},{},{}", num(pt.fom_seconds), num(pt.rom_seconds))?;
            }
            Err(msg) => {
                writeln!(errs, "{mu},,,,,,failed")?;
                diagnostics.push(format!("mu = {:?}: {msg}", e.mu));
            }
        }
    }
    errs.flush()?;
    corr.flush()?;
    time.flush()?;
    if !diagnostics.is_empty() {
        fs::write(out.join("sweep_diagnostics.txt"), diagnostics.join("\n") + "\n")?;
    }
    Ok(())
}

/// Writes `bounds_<mu>.csv` per parameter and `bounds_diagnostics.txt`
/// with precondition failures. Returns `BoundFailure` after writing if
/// any applicable bound is violated beyond slack.
pub fn run_bounds(exp: &Experiment, basis: &ReducedBasis, mus: &[Vec<f64>]) -> Result<Vec<BoundReport>, CliError> {
    let out = &exp.config.out;
    let mut reports = Vec::with_capacity(mus.len());
    let mut diagnostics = Vec::new();
    for mu in mus {
        let report = exp.bounds(basis, mu)?;
        let mut w = create(out, &bounds_file(mu))?;
        report.write_csv(&mut w)?;
        w.flush()?;
        diagnostics.extend(report.diagnostics.iter().map(|d| format!("mu = {mu:?}: {d}")));
        reports.push(report);
    }
    let mut w = create(out, "bounds_diagnostics.txt")?;
    for d in &diagnostics {
        writeln!(w, "{d}")?;
    }
    w.flush()?;
    let violations: usize = reports.iter().map(|r| r.failures().len()).sum();
    if violations > 0 {
        return Err(CliError::BoundFailure { violations });
    }
    Ok(reports)
}

pub fn bounds_file(mu: &[f64]) -> String {
    format!("bounds_{}.csv", mu_tag(mu))
}
