//! Dense symmetric and symmetric-definite eigensolvers.
//!
//! The standard problem is reduced to tridiagonal form with Householder
//! reflections and diagonalized with implicit-shift QL. The generalized
//! problem `A·φ = λ·M·φ` is brought to standard form through the Cholesky
//! factor of `M`.

use super::cholesky::{cholesky, solve_lower_in_place, solve_lower_transpose_in_place};
use super::{norm2, DenseMatrix, LinalgError, SymOperator};

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_SWEEPS: usize = 60;

/// Inner product that defines orthonormality of the eigenvector columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// `VᵀV = I`.
    Identity,
    /// `ΦᵀMΦ = I` for the `M` of the solved pencil.
    Pencil,
}

/// Eigenvalues in ascending order with their eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
    pub metric: Metric,
    /// `‖Aφ_k − λ_k Mφ_k‖₂` per pair.
    pub residual_norms: Vec<f64>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// Keeps the lowest `k` pairs.
    pub fn truncate(&self, k: usize) -> EigenSolution {
        let k = k.min(self.len());
        EigenSolution {
            values: self.values[..k].to_vec(),
            vectors: self.vectors.leading_columns(k),
            metric: self.metric,
            residual_norms: self.residual_norms[..k].to_vec(),
        }
    }
}

/// Eigendecomposition of a symmetric dense matrix; `V` is orthonormal.
pub fn sym_eig_dense(a: &DenseMatrix) -> Result<EigenSolution, LinalgError> {
    let (values, mut vectors) = sym_eig_raw(a)?;
    vectors.normalize_column_signs();
    let residual_norms = residuals(a, None::<&DenseMatrix>, &values, &vectors);
    Ok(EigenSolution {
        values,
        vectors,
        metric: Metric::Identity,
        residual_norms,
    })
}

/// Eigendecomposition of the pencil `(A, M)` with `M` positive definite.
///
/// Eigenvectors are `M`-orthonormal.
pub fn gen_eig_dense(a: &DenseMatrix, m: &DenseMatrix) -> Result<EigenSolution, LinalgError> {
    if a.shape() != m.shape() {
        return Err(LinalgError::ShapeMismatch {
            expected: a.shape(),
            found: m.shape(),
        });
    }
    let l = cholesky(m)?;
    let c = reduce_to_standard(a, &l);
    let (values, v) = sym_eig_raw(&c)?;
    let mut phi = v;
    solve_lower_transpose_in_place(&l, &mut phi);
    phi.normalize_column_signs();
    let residual_norms = residuals(a, Some(m), &values, &phi);
    Ok(EigenSolution {
        values,
        vectors: phi,
        metric: Metric::Pencil,
        residual_norms,
    })
}

/// `L⁻¹·A·L⁻ᵀ`, symmetrized.
pub fn reduce_to_standard(a: &DenseMatrix, l: &DenseMatrix) -> DenseMatrix {
    let mut y = a.clone();
    solve_lower_in_place(l, &mut y);
    let mut c = y.transpose();
    solve_lower_in_place(l, &mut c);
    c.symmetrize();
    c
}

/// `‖Aφ_k − λ_k Mφ_k‖₂` for each column (`M = I` when `None`).
pub fn residuals<A: SymOperator + ?Sized, B: SymOperator + ?Sized>(
    a: &A,
    m: Option<&B>,
    values: &[f64],
    vectors: &DenseMatrix,
) -> Vec<f64> {
    let av = a.apply_block(vectors);
    let mv = m.map(|m| m.apply_block(vectors));
    let mut sums = vec![0.0; values.len()];
    for i in 0..vectors.rows() {
        let ar = av.row(i);
        let xr = match &mv {
            Some(mv) => mv.row(i),
            None => vectors.row(i),
        };
        for k in 0..values.len() {
            let r = ar[k] - values[k] * xr[k];
            sums[k] += r * r;
        }
    }
    sums.into_iter().map(f64::sqrt).collect()
}

fn sym_eig_raw(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    Ok((values, v.select_columns(&order)))
}

/// Householder reduction to tridiagonal form; on exit `v` holds the
/// accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
/// subdiagonal.
fn tridiagonalize(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);

            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, accumulating into `v`.
fn tridiagonal_ql(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(LinalgError::NoConvergence {
                        sweeps: MAX_QL_SWEEPS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = s * vk + c * vk1;
                        v[(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Largest principal angle (radians) between the column spans of two
/// equally sized blocks, both orthonormal in the metric `w` (identity when
/// `None`).
///
/// Uses `sin θ_max = ‖(I − YYᵀW)X‖_W`, which stays accurate for tiny angles.
pub fn max_principal_angle<W: SymOperator + ?Sized>(
    x: &DenseMatrix,
    y: &DenseMatrix,
    w: Option<&W>,
) -> f64 {
    let apply = |b: &DenseMatrix| match w {
        Some(w) => w.apply_block(b),
        None => b.clone(),
    };
    let wx = apply(x);
    let c = y.t_matmul(&wx); // YᵀWX
    let r = x.sub(&y.matmul(&c));
    let mut g = r.t_matmul(&apply(&r));
    g.symmetrize();
    let eig = match sym_eig_raw(&g) {
        Ok((vals, _)) => vals,
        Err(_) => return f64::NAN,
    };
    let sin2 = eig.last().copied().unwrap_or(0.0).clamp(0.0, 1.0);
    sin2.sqrt().asin()
}

/// Euclidean norm of each column.
pub fn column_norms(x: &DenseMatrix) -> Vec<f64> {
    (0..x.cols()).map(|j| norm2(&x.column(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_sorts() {
        let a = DenseMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let s = sym_eig_dense(&a).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn swap_matrix() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = sym_eig_dense(&a).unwrap();
        assert!((s.values[0] + 1.0).abs() < 1e-15);
        assert!((s.values[1] - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = s.vector(0);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] + v0[1]).abs() < 1e-14);
        let v1 = s.vector(1);
        assert!((v1[0] - h).abs() < 1e-14 && (v1[0] - v1[1]).abs() < 1e-14);
    }

    #[test]
    fn diagonal_pencil() {
        let a = DenseMatrix::from_diag(&[2.0, 8.0]);
        let m = DenseMatrix::from_diag(&[1.0, 2.0]);
        let s = gen_eig_dense(&a, &m).unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-14);
        assert!((s.values[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn identity_pencil_has_unit_spectrum() {
        let m = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ]);
        let s = gen_eig_dense(&m, &m).unwrap();
        for v in s.values {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn one_by_one_and_empty() {
        let s = sym_eig_dense(&DenseMatrix::from_diag(&[-7.5])).unwrap();
        assert_eq!(s.values, vec![-7.5]);
        assert_eq!(s.vectors[(0, 0)], 1.0);
        assert!(sym_eig_dense(&DenseMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn non_finite_input_rejected() {
        let a = DenseMatrix::from_diag(&[1.0, f64::NAN]);
        assert_eq!(sym_eig_dense(&a).unwrap_err(), LinalgError::NonFinite);
    }
}
