use super::{dot, LinalgError, SymOperator};

/// `xᵀ W y`.
pub fn weighted_dot<W: SymOperator + ?Sized>(x: &[f64], y: &[f64], w: &W) -> Result<f64, LinalgError> {
    check_dims(x.len(), y.len(), w.dim())?;
    Ok(dot(x, &w.apply(y)))
}

/// `√(xᵀ W x)`.
///
/// Tiny negative values from rounding are clamped to zero; anything below
/// `−1e-12·‖x‖²·‖W‖₁` means `W` is not positive semidefinite.
pub fn weighted_norm<W: SymOperator + ?Sized>(x: &[f64], w: &W) -> Result<f64, LinalgError> {
    check_dims(x.len(), x.len(), w.dim())?;
    let q = dot(x, &w.apply(x));
    let floor = 1e-12 * dot(x, x) * w.norm1();
    if q < -floor {
        return Err(LinalgError::NegativeNormSquared { value: q });
    }
    Ok(q.max(0.0).sqrt())
}

fn check_dims(nx: usize, ny: usize, nw: usize) -> Result<(), LinalgError> {
    if nx != nw || ny != nw {
        return Err(LinalgError::ShapeMismatch {
            expected: (nw, 1),
            found: (nx.max(ny), 1),
        });
    }
    Ok(())
}
