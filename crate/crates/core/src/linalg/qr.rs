use super::DenseMatrix;

/// Columns whose `|R_jj|` falls at or below this fraction of `max_i |R_ii|`
/// are treated as numerically dependent and dropped.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Thin QR result: `q` keeps one orthonormal column per independent input
/// column.
#[derive(Clone, Debug)]
pub struct ThinQr {
    pub q: DenseMatrix,
    pub rank: usize,
    /// `R_jj` for every input column, before truncation.
    pub r_diag: Vec<f64>,
    /// Input columns that survived truncation.
    pub kept: Vec<usize>,
}

/// Householder thin QR of an n×r matrix with rank truncation.
///
/// `R` has a nonnegative diagonal, so an input with orthonormal columns is
/// returned unchanged up to rounding.
pub fn qr_thin(s: &DenseMatrix) -> ThinQr {
    let (n, r) = s.shape();
    assert!(n >= r, "qr_thin requires n >= r (got {n}x{r})");
    // work column-major: one Vec per column
    let mut cols: Vec<Vec<f64>> = (0..r).map(|j| s.column(j)).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(r);
    let mut r_diag = vec![0.0; r];

    for j in 0..r {
        let x = &cols[j][j..];
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.to_vec();
        let beta;
        if alpha == 0.0 {
            beta = 0.0;
            r_diag[j] = 0.0;
        } else {
            // reflect x onto -sign(x0)·alpha·e1, then fix the sign of R_jj below
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm2: f64 = v.iter().map(|t| t * t).sum();
            beta = 2.0 / vnorm2;
            r_diag[j] = -sign * alpha;
        }
        for col in cols.iter_mut().skip(j) {
            if beta == 0.0 {
                break;
            }
            let tail = &mut col[j..];
            let proj: f64 = tail.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * beta;
            for (t, vi) in tail.iter_mut().zip(&v) {
                *t -= proj * vi;
            }
        }
        reflectors.push((v, beta));
    }

    let rmax = r_diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let kept: Vec<usize> = (0..r)
        .filter(|&j| rmax > 0.0 && r_diag[j].abs() > QR_RANK_TOL * rmax)
        .collect();

    // Q e_j = H_0 H_1 ... H_{r-1} e_j, with sign flip so R_jj ≥ 0
    let mut q = DenseMatrix::zeros(n, kept.len());
    for (c, &j) in kept.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut e[k..];
            let proj: f64 = tail.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * beta;
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= proj * vi;
            }
        }
        if r_diag[j] < 0.0 {
            e.iter_mut().for_each(|t| *t = -*t);
        }
        q.set_column(c, &e);
    }
    let r_diag = r_diag.iter().map(|d| d.abs()).collect();
    ThinQr {
        rank: kept.len(),
        q,
        r_diag,
        kept,
    }
}
