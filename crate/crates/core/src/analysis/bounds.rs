use std::io::Write;

use super::errors::eigvec_errors_unchecked;
use super::{
    check_group, compute_kappas, compute_tau, partition_spectrum, AProjector, AnalysisError, DEFAULT_PARTITION_TOL,
};
use crate::eigsolve::spd_shift;
use crate::linalg::{DenseMatrix, EigenSolution, SparseSymMatrix};

/// Relative slack on the eigenvalue bounds; absolute slack on the
/// eigenvector bound (all vectors are `M`-normalized).
pub const DEFAULT_BOUND_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundOptions {
    pub partition_tol: f64,
    pub slack: f64,
    /// Shift the stiffness when `λ₁ ≤ 0`; without it an indefinite `A`
    /// makes `P_A` undefined and the report fails.
    pub shift: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            partition_tol: DEFAULT_PARTITION_TOL,
            slack: DEFAULT_BOUND_SLACK,
            shift: true,
        }
    }
}

/// One index of a bound report. `None` flags mark bounds whose
/// preconditions fail (infinite `κ` or `τ`, undefined groups).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    /// One-based index.
    pub k: usize,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub kappa: f64,
    /// `κ_k²(λ_k + t) − t`.
    pub kappa_sq_lambda: f64,
    pub tau: f64,
    pub eps: f64,
    pub delta: f64,
    pub lower_ok: bool,
    pub upper_ok: Option<bool>,
    pub vec_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub mu: Vec<f64>,
    /// Shift applied to the stiffness for the oblique projector and `κ`.
    pub shift_t: f64,
    pub rows: Vec<BoundRow>,
    pub diagnostics: Vec<String>,
}

fn flag(f: Option<bool>) -> &'static str {
    match f {
        Some(true) => "true",
        Some(false) => "false",
        None => "na",
    }
}

impl BoundReport {
    /// No applicable bound is violated.
    pub fn all_pass(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.lower_ok && r.upper_ok != Some(false) && r.vec_ok != Some(false))
    }

    /// Rows where some applicable bound fails.
    pub fn failures(&self) -> Vec<&BoundRow> {
        self.rows
            .iter()
            .filter(|r| !r.lower_ok || r.upper_ok == Some(false) || r.vec_ok == Some(false))
            .collect()
    }

    pub fn csv_header(param_dim: usize) -> String {
        let mut cols: Vec<String> = if param_dim == 1 {
            vec!["mu".into()]
        } else {
            (1..=param_dim).map(|i| format!("mu{i}")).collect()
        };
        for c in [
            "k",
            "lambda",
            "lambda_tilde",
            "kappa",
            "kappa_sq_lambda",
            "tau",
            "eps",
            "delta",
            "lower_ok",
            "upper_ok",
            "vec_ok",
            "shift_t",
        ] {
            cols.push(c.into());
        }
        cols.join(",")
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::csv_header(self.mu.len()))?;
        let mu: Vec<String> = self.mu.iter().map(|v| format!("{v:.16e}")).collect();
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e}",
                mu.join(","),
                r.k,
                r.lambda,
                r.lambda_tilde,
                r.kappa,
                r.kappa_sq_lambda,
                r.tau,
                r.eps,
                r.delta,
                r.lower_ok,
                flag(r.upper_ok),
                flag(r.vec_ok),
                self.shift_t
            )?;
        }
        Ok(())
    }
}

/// Checks `λ_k ≤ λ̃_k ≤ κ_k²λ_k` and `ε_k ≤ (1 + τ_j)δ_k` for every index
/// covered by both the FOM pairs and the reduced values.
///
/// When `λ₁ ≤ 0` the stiffness is shifted to `A + tM` with
/// `t = max(0, −λ₁) + 1`; `κ`, `δ`, `τ` and both eigenvalue bounds are then
/// evaluated on the shifted pencil and reported mapped back by `−t`.
#[allow(clippy::too_many_arguments)]
pub fn verify_bounds(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    fom: &EigenSolution,
    q: &DenseMatrix,
    lambda_tilde: &[f64],
    phi_tilde: &DenseMatrix,
    mu: &[f64],
    opts: &BoundOptions,
) -> Result<BoundReport, AnalysisError> {
    let k_max = fom.len().min(lambda_tilde.len());
    let mut diagnostics = Vec::new();
    let lambda1 = fom.values.first().copied().unwrap_or(1.0);
    let (t, shifted);
    let a_spd = if opts.shift && lambda1 <= 0.0 {
        shifted = spd_shift(a, m, lambda1);
        t = shifted.t;
        if !shifted.probe_ok {
            diagnostics.push(format!("shifted stiffness (t = {t}) failed the positivity probe"));
        }
        &shifted.a
    } else {
        t = 0.0;
        a
    };
    let proj = AProjector::new(a_spd, q)?;
    let phi = fom.vectors.leading_columns(k_max);
    let kappas = compute_kappas(&phi, &proj, m);
    let partition = partition_spectrum(&fom.values[..k_max], opts.partition_tol);
    let errs = eigvec_errors_unchecked(&phi, &partition, phi_tilde, m, &proj);

    let mut shifted_partition = partition.clone();
    shifted_partition.distinct.iter_mut().for_each(|v| *v += t);
    let shifted_tilde: Vec<f64> = lambda_tilde.iter().map(|v| v + t).collect();

    let mut rows = Vec::with_capacity(k_max);
    for j in 0..partition.num_groups() {
        let mut applicable = true;
        if let Err(e) = check_group(&partition, j, lambda_tilde) {
            diagnostics.push(e.to_string());
            applicable = false;
        }
        let tau = match compute_tau(&shifted_partition, j, &shifted_tilde) {
            Ok(tau) => {
                if let Some(d) = tau.diagnostic {
                    diagnostics.push(d);
                }
                tau.value
            }
            Err(e) => {
                diagnostics.push(format!("{e}; eigenvector bound not applicable"));
                f64::NAN
            }
        };
        for k in partition.index_set(j) {
            let (lam, lt) = (fom.values[k], lambda_tilde[k]);
            let kappa = &kappas[k];
            if let Some(d) = &kappa.diagnostic {
                diagnostics.push(format!("k = {}: {d}", k + 1));
            }
            let upper_shifted = kappa.value * kappa.value * (lam + t);
            let e = errs[k];
            let vec_ok = (applicable && tau.is_finite()).then_some(e.eps <= (1.0 + tau) * e.delta + opts.slack);
            rows.push(BoundRow {
                k: k + 1,
                lambda: lam,
                lambda_tilde: lt,
                kappa: kappa.value,
                kappa_sq_lambda: upper_shifted - t,
                tau,
                eps: e.eps,
                delta: e.delta,
                lower_ok: lt + t >= (lam + t) - opts.slack * (lam + t).abs(),
                upper_ok: kappa
                    .is_finite()
                    .then(|| lt + t <= upper_shifted + opts.slack * upper_shifted.abs()),
                vec_ok,
            });
        }
    }
    Ok(BoundReport {
        mu: mu.to_vec(),
        shift_t: t,
        rows,
        diagnostics,
    })
}
