use std::io::{Read, Write};

use super::RomError;
use crate::linalg::DenseMatrix;

/// File signature of a persisted basis.
pub const BASIS_MAGIC: &[u8; 8] = b"RBEIGQ01";

/// Euclidean-orthonormal reduced basis with its training provenance.
///
/// Byte layout (little endian): magic `RBEIGQ01`; `u64` n, r, p, s, d;
/// `s·d` f64 training coordinates (point-major); `n·r` f64 entries of `Q`
/// in column-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBasis {
    /// n×r with `QᵀQ = I`.
    pub q: DenseMatrix,
    pub training: Vec<Vec<f64>>,
    pub pairs_per_param: usize,
    /// Snapshot columns dropped by the rank-revealing QR.
    pub truncated: usize,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn rank(&self) -> usize {
        self.q.cols()
    }

    /// Replaces `Q` by `QU` for an orthogonal `U`.
    pub fn rotated(&self, u: &DenseMatrix) -> ReducedBasis {
        ReducedBasis {
            q: self.q.matmul(u),
            ..self.clone()
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), RomError> {
        let d = self.training.first().map_or(0, Vec::len);
        w.write_all(BASIS_MAGIC)?;
        for v in [self.dim(), self.rank(), self.pairs_per_param, self.training.len(), d] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for mu in &self.training {
            for x in mu {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        for j in 0..self.rank() {
            for i in 0..self.dim() {
                w.write_all(&self.q[(i, j)].to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<ReducedBasis, RomError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BASIS_MAGIC {
            return Err(RomError::Format("bad magic".into()));
        }
        let mut header = [0usize; 5];
        for h in &mut header {
            let v = read_u64(&mut r)?;
            *h = usize::try_from(v).map_err(|_| RomError::Format(format!("header value {v} too large")))?;
        }
        let [n, rank, p, s, d] = header;
        let mut training = Vec::with_capacity(s);
        for _ in 0..s {
            training.push((0..d).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>, _>>()?);
        }
        let mut q = DenseMatrix::zeros(n, rank);
        for j in 0..rank {
            for i in 0..n {
                q[(i, j)] = read_f64(&mut r)?;
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(RomError::Format("trailing bytes after basis payload".into()));
        }
        let truncated = (p * s).saturating_sub(rank);
        Ok(ReducedBasis {
            q,
            training,
            pairs_per_param: p,
            truncated,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), RomError> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<ReducedBasis, RomError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// `Q` as CSV, one row per DOF.
    pub fn write_csv(&self, w: impl Write) -> Result<(), RomError> {
        Ok(crate::linalg::io::write_dense_csv(&self.q, w)?)
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64, RomError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, RomError> {
    Ok(f64::from_bits(read_u64(r)?))
}
