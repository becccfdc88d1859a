use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{cholesky, DenseMatrix, SparseSymMatrix};

/// Result of shifting a pencil to make its first operator positive definite.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub t: f64,
    /// `A + tM`.
    pub a: SparseSymMatrix,
    /// Whether `Zᵀ(A + tM)Z` factored for the random probe `Z`.
    pub probe_ok: bool,
}

/// Columns in the random positivity probe.
const PROBE_COLUMNS: usize = 8;

/// Shifts `A` to `A + tM` with `t = max(0, −λ₁) + 1`.
///
/// `lambda1` is an estimate (or lower bound) of the smallest eigenvalue of
/// the pencil, so every shifted eigenvalue is at least one.
pub fn spd_shift(a: &SparseSymMatrix, m: &SparseSymMatrix, lambda1: f64) -> Shifted {
    let t = shift_for(lambda1);
    let shifted = a.linear_combination(1.0, m, t);
    let probe_ok = probe_positive_definite(&shifted, 0x5eed);
    Shifted {
        t,
        a: shifted,
        probe_ok,
    }
}

/// `max(0, −λ₁) + 1`.
pub fn shift_for(lambda1: f64) -> f64 {
    (-lambda1).max(0.0) + 1.0
}

/// Cholesky test of `ZᵀAZ` for a small seeded uniform random block `Z`.
pub fn probe_positive_definite(a: &SparseSymMatrix, seed: u64) -> bool {
    let n = a.dim();
    if n == 0 {
        return true;
    }
    let k = PROBE_COLUMNS.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DenseMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
    let mut g = z.t_matmul(&a.mul_dense(&z));
    g.symmetrize();
    cholesky(&g).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_values() {
        assert_eq!(shift_for(2.4), 1.0);
        assert!((shift_for(-4.67) - 5.67).abs() < 1e-15);
    }

    #[test]
    fn shifted_pencil_is_probed_positive() {
        // diag(-3, 1, 2) with M = I
        let a = SparseSymMatrix::from_triplets(3, &[(0, 0, -3.0), (1, 1, 1.0), (2, 2, 2.0)]).unwrap();
        let m = SparseSymMatrix::identity(3);
        assert!(!probe_positive_definite(&a, 1));
        let s = spd_shift(&a, &m, -3.0);
        assert_eq!(s.t, 4.0);
        assert!(s.probe_ok);
        assert_eq!(s.a.diagonal(), vec![1.0, 5.0, 6.0]);
    }
}
