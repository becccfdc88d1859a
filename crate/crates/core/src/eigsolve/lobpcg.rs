//! Block LOBPCG for the lowest eigenpairs of a sparse symmetric-definite
//! pencil, in the orthogonalized form: the search directions `W` and `P`
//! are made `M`-orthogonal to the current iterate and to each other, then
//! `M`-orthonormalized with a scaled SVD-like step (SVQB) before each
//! Rayleigh–Ritz projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EigsolveError;
use crate::linalg::{
    column_norms, gen_eig_dense, sym_eig_dense, BandedCholesky, DenseMatrix, EigenSolution, LinalgError, Metric,
    SparseSymMatrix,
};

/// Extra block vectors carried beyond the requested `p`: `min(p, 5)`.
const MAX_GUARD: usize = 5;
/// Relative eigenvalue threshold for dropping directions in SVQB.
const SVQB_DROP: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    /// Inverse diagonal of `A + tM`, `t` chosen so the diagonal is positive.
    Jacobi,
    /// Exact banded Cholesky factorization of `A + tM`, `t ≥ 0` increased
    /// until the factorization succeeds.
    BandedCholesky,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub block_size: usize,
    /// Target for `‖Ax − λMx‖₂ / ((‖A‖₁ + |λ|‖M‖₁)‖x‖₂)`.
    pub tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
    pub seed: u64,
    /// Keep per-iteration residuals in the output.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            block_size: 1,
            tol: 1e-9,
            max_iter: 1000,
            preconditioner: Preconditioner::Jacobi,
            seed: 0,
            record_history: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LobpcgOutput {
    /// Lowest `p` pairs, `M`-orthonormal; `residual_norms` are absolute.
    pub solution: EigenSolution,
    pub relative_residuals: Vec<f64>,
    pub iterations: usize,
    /// Relative residuals of the first `p` iterates, one row per iteration.
    pub history: Vec<Vec<f64>>,
    /// Non-fatal diagnostics (restarts, non-monotone residuals).
    pub warnings: Vec<String>,
    /// Shift used to build the preconditioner.
    pub preconditioner_shift: f64,
}

/// `‖Ax − λMx‖₂ / ((‖A‖₁ + |λ|‖M‖₁)‖x‖₂)` per column.
pub fn relative_residuals(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    values: &[f64],
    vectors: &DenseMatrix,
) -> Vec<f64> {
    let ax = a.mul_dense(vectors);
    let mx = m.mul_dense(vectors);
    rel_from_blocks(&ax, &mx, values, vectors, a.norm1(), m.norm1())
}

fn residual_block(ax: &DenseMatrix, mx: &DenseMatrix, lam: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(ax.rows(), ax.cols(), |i, j| ax[(i, j)] - lam[j] * mx[(i, j)])
}

fn rel_from_blocks(
    ax: &DenseMatrix,
    mx: &DenseMatrix,
    lam: &[f64],
    x: &DenseMatrix,
    norm_a: f64,
    norm_m: f64,
) -> Vec<f64> {
    let r = residual_block(ax, mx, lam);
    let rn = column_norms(&r);
    let xn = column_norms(x);
    (0..lam.len())
        .map(|j| {
            let den = (norm_a + lam[j].abs() * norm_m) * xn[j];
            if den > 0.0 {
                rn[j] / den
            } else {
                rn[j]
            }
        })
        .collect()
}

enum Precond {
    Identity,
    Diagonal(Vec<f64>),
    Banded(BandedCholesky),
}

impl Precond {
    fn apply(&self, r: &DenseMatrix) -> DenseMatrix {
        match self {
            Precond::Identity => r.clone(),
            Precond::Diagonal(d) => DenseMatrix::from_fn(r.rows(), r.cols(), |i, j| r[(i, j)] / d[i]),
            Precond::Banded(c) => c.solve_block(r),
        }
    }
}

fn build_preconditioner(
    kind: Preconditioner,
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
) -> Result<(Precond, f64), EigsolveError> {
    let da = a.diagonal();
    let dm = m.diagonal();
    // λ₁ ≤ A_ii / M_ii, so any SPD shift must exceed −min_i A_ii/M_ii
    let min_ratio = da.iter().zip(&dm).map(|(x, y)| x / y).fold(f64::INFINITY, f64::min);
    match kind {
        Preconditioner::None => Ok((Precond::Identity, 0.0)),
        Preconditioner::Jacobi => {
            let t = if min_ratio > 0.0 { 0.0 } else { 1.0 - min_ratio };
            let d = da.iter().zip(&dm).map(|(x, y)| x + t * y).collect();
            Ok((Precond::Diagonal(d), t))
        }
        Preconditioner::BandedCholesky => {
            let mut t = 0.0;
            for _ in 0..64 {
                let shifted = if t == 0.0 { a.clone() } else { a.linear_combination(1.0, m, t) };
                match BandedCholesky::factor(&shifted) {
                    Ok(c) => return Ok((Precond::Banded(c), t)),
                    Err(_) => {
                        t = if t == 0.0 { (1.0 - min_ratio).max(1.0) } else { 2.0 * t };
                    }
                }
            }
            Err(EigsolveError::Linalg(LinalgError::NotPositiveDefinite { pivot: 0 }))
        }
    }
}

/// `M`-orthonormalizes the columns of `u`, dropping numerically dependent
/// directions. Two passes of scaled Gram-eigendecomposition.
fn svqb(m: &SparseSymMatrix, u: &DenseMatrix) -> DenseMatrix {
    let mut u = u.clone();
    for _ in 0..2 {
        let k = u.cols();
        if k == 0 {
            break;
        }
        let mu = m.mul_dense(&u);
        let mut g = u.t_matmul(&mu);
        g.symmetrize();
        let d: Vec<f64> = g
            .diag()
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
            .collect();
        let gs = DenseMatrix::from_fn(k, k, |i, j| d[i] * g[(i, j)] * d[j]);
        let Ok(eig) = sym_eig_dense(&gs) else {
            return DenseMatrix::zeros(u.rows(), 0);
        };
        let tmax = eig.values.iter().fold(0.0_f64, |a, &b| a.max(b));
        let keep: Vec<usize> = (0..k).filter(|&j| eig.values[j] > SVQB_DROP * tmax).collect();
        let tr = DenseMatrix::from_fn(k, keep.len(), |i, c| {
            let j = keep[c];
            d[i] * eig.vectors[(i, j)] / eig.values[j].sqrt()
        });
        u = u.matmul(&tr);
    }
    u
}

/// `w − x·(Mx)ᵀw`, i.e. removes the `M`-projection onto an `M`-orthonormal
/// block `x` (with `mx = M·x`).
fn orth_against(w: &DenseMatrix, x: &DenseMatrix, mx: &DenseMatrix) -> DenseMatrix {
    if x.cols() == 0 || w.cols() == 0 {
        return w.clone();
    }
    let c = mx.t_matmul(w);
    w.sub(&x.matmul(&c))
}

struct Ritz {
    x: DenseMatrix,
    values: Vec<f64>,
}

/// Rayleigh–Ritz on span(s), keeping the lowest `k` pairs.
fn rayleigh_ritz(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    s: &DenseMatrix,
    k: usize,
) -> Result<(Ritz, DenseMatrix), LinalgError> {
    let as_ = a.mul_dense(s);
    let ms = m.mul_dense(s);
    let mut ga = s.t_matmul(&as_);
    let mut gm = s.t_matmul(&ms);
    ga.symmetrize();
    gm.symmetrize();
    let sol = gen_eig_dense(&ga, &gm)?;
    let c = sol.vectors.leading_columns(k);
    let x = s.matmul(&c);
    Ok((
        Ritz {
            x,
            values: sol.values[..k].to_vec(),
        },
        sol.vectors,
    ))
}

fn dense_fallback(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    p: usize,
) -> Result<LobpcgOutput, EigsolveError> {
    let sol = gen_eig_dense(&a.to_dense(), &m.to_dense())?.truncate(p);
    let rel = relative_residuals(a, m, &sol.values, &sol.vectors);
    Ok(LobpcgOutput {
        solution: sol,
        relative_residuals: rel,
        iterations: 0,
        history: Vec::new(),
        warnings: Vec::new(),
        preconditioner_shift: 0.0,
    })
}

/// Lowest `opts.block_size` eigenpairs of `(A, M)`.
///
/// Small problems (`3·(p + guard) > n`) are solved densely.
pub fn lobpcg(a: &SparseSymMatrix, m: &SparseSymMatrix, opts: &SolverOptions) -> Result<LobpcgOutput, EigsolveError> {
    let n = a.dim();
    let p = opts.block_size;
    if m.dim() != n {
        return Err(EigsolveError::InvalidOptions(format!(
            "pencil dimensions differ ({n} vs {})",
            m.dim()
        )));
    }
    if p == 0 || p > n {
        return Err(EigsolveError::InvalidOptions(format!(
            "block size {p} must lie in 1..={n}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(EigsolveError::InvalidOptions(format!("tolerance {} must be positive", opts.tol)));
    }
    let k = (p + p.min(MAX_GUARD)).min(n);
    if 3 * k > n {
        return dense_fallback(a, m, p);
    }

    let (prec, prec_shift) = build_preconditioner(opts.preconditioner, a, m)?;
    let norm_a = a.norm1();
    let norm_m = m.norm1();
    let mut warnings = Vec::new();
    let mut history = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let x0 = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
    let x0 = svqb(m, &x0);
    if x0.cols() < k {
        return Err(EigsolveError::InvalidOptions("initial block is rank deficient".into()));
    }
    let (ritz, _) = rayleigh_ritz(a, m, &x0, k)?;
    let mut x = ritz.x;
    let mut lam = ritz.values;
    let mut pdir: Option<DenseMatrix> = None;
    let mut last_rel = vec![f64::INFINITY; k];

    for iter in 0..=opts.max_iter {
        let ax = a.mul_dense(&x);
        let mx = m.mul_dense(&x);
        let rel = rel_from_blocks(&ax, &mx, &lam, &x, norm_a, norm_m);
        if opts.record_history {
            history.push(rel[..p].to_vec());
        }
        last_rel.clone_from(&rel);
        if rel[..p].iter().all(|&r| r <= opts.tol) {
            // final projection on X alone restores exact M-orthonormality
            let (fin, _) = rayleigh_ritz(a, m, &x, k)?;
            let mut xf = fin.x.leading_columns(p);
            xf.normalize_column_signs();
            let vals = fin.values[..p].to_vec();
            let rel_f = relative_residuals(a, m, &vals, &xf);
            if rel_f.iter().all(|&r| r <= opts.tol) {
                let abs = crate::linalg::residuals(a, Some(m), &vals, &xf);
                check_monotone(&history, &mut warnings);
                return Ok(LobpcgOutput {
                    solution: EigenSolution {
                        values: vals,
                        vectors: xf,
                        metric: Metric::Pencil,
                        residual_norms: abs,
                    },
                    relative_residuals: rel_f,
                    iterations: iter,
                    history,
                    warnings,
                    preconditioner_shift: prec_shift,
                });
            }
            x = fin.x;
            lam = fin.values;
            pdir = None;
            continue;
        }
        if iter == opts.max_iter {
            break;
        }

        // soft locking: converged columns stay in X but get no new directions
        let active: Vec<usize> = (0..k).filter(|&j| rel[j] > opts.tol).collect();
        let r = residual_block(&ax, &mx, &lam).select_columns(&active);
        let mut w = prec.apply(&r);

        let pm = pdir.take().map(|pb| {
            let pb = orth_against(&orth_against(&pb, &x, &mx), &x, &mx);
            let pb = svqb(m, &pb);
            let mp = m.mul_dense(&pb);
            (pb, mp)
        });
        for _ in 0..2 {
            w = orth_against(&w, &x, &mx);
            if let Some((pb, mp)) = &pm {
                w = orth_against(&w, pb, mp);
            }
        }
        let w = svqb(m, &w);
        let pb = pm.map(|(pb, _)| pb).filter(|pb| pb.cols() > 0);

        let mut blocks: Vec<&DenseMatrix> = vec![&x, &w];
        if let Some(pb) = &pb {
            blocks.push(pb);
        }
        let s = DenseMatrix::hstack(&blocks);
        let rr = match rayleigh_ritz(a, m, &s, k) {
            Ok(rr) => Some(rr),
            Err(_) if pb.is_some() => {
                warnings.push(format!("iteration {iter}: ill-conditioned basis, dropped P"));
                let s2 = DenseMatrix::hstack(&[&x, &w]);
                rayleigh_ritz(a, m, &s2, k).ok()
            }
            Err(_) => None,
        };
        let Some((rit, c)) = rr else {
            warnings.push(format!("iteration {iter}: breakdown, restarted from re-orthonormalized X"));
            let xr = svqb(m, &x);
            if xr.cols() < k {
                return Err(EigsolveError::NoConvergence {
                    iterations: iter,
                    max_residual: rel.iter().cloned().fold(0.0, f64::max),
                    residuals: rel,
                });
            }
            let (rit, _) = rayleigh_ritz(a, m, &xr, k)?;
            x = rit.x;
            lam = rit.values;
            continue;
        };
        // new P: the W/P part of the Ritz vectors for the active indices
        let nxw = s.cols();
        let kx = k;
        let dirs = nxw - kx;
        if dirs > 0 && c.rows() == nxw {
            let tail = DenseMatrix::from_fn(dirs, active.len(), |i, j| c[(kx + i, active[j])]);
            let wp = DenseMatrix::hstack(&blocks[1..]);
            pdir = Some(wp.matmul(&tail));
        } else if dirs > 0 {
            // P was dropped for this step: use W only
            let wdirs = w.cols();
            let tail = DenseMatrix::from_fn(wdirs, active.len(), |i, j| c[(kx + i, active[j])]);
            pdir = Some(w.matmul(&tail));
        }
        x = rit.x;
        lam = rit.values;
    }

    Err(EigsolveError::NoConvergence {
        iterations: opts.max_iter,
        max_residual: last_rel[..p].iter().cloned().fold(0.0, f64::max),
        residuals: last_rel[..p].to_vec(),
    })
}

/// Flags runs where the residual at iteration `2j` exceeds the one at `j`.
fn check_monotone(history: &[Vec<f64>], warnings: &mut Vec<String>) {
    for j in 1..history.len() / 2 {
        let early = history[j].iter().cloned().fold(0.0, f64::max);
        let late = history[2 * j].iter().cloned().fold(0.0, f64::max);
        if late > early {
            warnings.push(format!(
                "residual at iteration {} ({late:e}) exceeds iteration {j} ({early:e})",
                2 * j
            ));
            break;
        }
    }
}
