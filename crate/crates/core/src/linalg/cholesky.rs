use super::{DenseMatrix, LinalgError, SparseSymMatrix};

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
///
/// Only the lower triangle of `a` is read.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            let (li, lj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= li[k] * lj[k];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L·X = B` in place for lower-triangular `L`.
pub fn solve_lower_in_place(l: &DenseMatrix, b: &mut DenseMatrix) {
    let n = l.rows();
    assert_eq!(b.rows(), n);
    let k = b.cols();
    for i in 0..n {
        for p in 0..i {
            let lip = l[(i, p)];
            if lip == 0.0 {
                continue;
            }
            for c in 0..k {
                let v = b[(p, c)];
                b[(i, c)] -= lip * v;
            }
        }
        let d = l[(i, i)];
        for v in b.row_mut(i) {
            *v /= d;
        }
    }
}

/// Solves `Lᵀ·X = B` in place for lower-triangular `L`.
pub fn solve_lower_transpose_in_place(l: &DenseMatrix, b: &mut DenseMatrix) {
    let n = l.rows();
    assert_eq!(b.rows(), n);
    let k = b.cols();
    for i in (0..n).rev() {
        for p in (i + 1)..n {
            let lpi = l[(p, i)];
            if lpi == 0.0 {
                continue;
            }
            for c in 0..k {
                let v = b[(p, c)];
                b[(i, c)] -= lpi * v;
            }
        }
        let d = l[(i, i)];
        for v in b.row_mut(i) {
            *v /= d;
        }
    }
}

/// Solves `A·X = B` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut x = b.clone();
    solve_lower_in_place(l, &mut x);
    solve_lower_transpose_in_place(l, &mut x);
    x
}

/// Cholesky factor of a sparse SPD matrix stored in band form.
///
/// Fill is confined to the envelope `|i - j| ≤ bandwidth`, which for the
/// lexicographically numbered tensor meshes used here is one grid plane.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i, i-bw ..= i] in band[i*(bw+1) ..]
    band: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseSymMatrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * w + (j + bw - i)] = v;
                }
            }
        }
        for j in 0..n {
            // L[j,j]
            let jlo = j.saturating_sub(bw);
            let mut d = band[j * w + bw];
            for k in jlo..j {
                let v = band[j * w + (k + bw - j)];
                d -= v * v;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j });
            }
            let d = d.sqrt();
            band[j * w + bw] = d;
            let ihi = (j + bw).min(n - 1);
            for i in (j + 1)..=ihi {
                let ilo = i.saturating_sub(bw).max(jlo);
                let mut s = band[i * w + (j + bw - i)];
                for k in ilo..j {
                    s -= band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)];
                }
                band[i * w + (j + bw - i)] = s / d;
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        assert_eq!(x.len(), n);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.band[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
        for i in (0..n).rev() {
            let x_i = x[i] / self.band[i * w + bw];
            x[i] = x_i;
            let lo = i.saturating_sub(bw);
            for k in lo..i {
                x[k] -= self.band[i * w + (k + bw - i)] * x_i;
            }
        }
    }

    /// Applies `A⁻¹` to every column of a row-major block.
    pub fn solve_block(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = b.clone();
        let mut col = vec![0.0; self.n];
        for c in 0..b.cols() {
            for (i, v) in col.iter_mut().enumerate() {
                *v = b[(i, c)];
            }
            self.solve_in_place(&mut col);
            out.set_column(c, &col);
        }
        out
    }
}
