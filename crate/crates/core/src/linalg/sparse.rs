use super::{DenseMatrix, LinalgError};

/// Symmetric sparse matrix in CSR form with the full (both triangles) pattern.
///
/// Invariants: `row_ptr` is nondecreasing, column indices are strictly
/// increasing within each row, and every stored `(i, j, v)` has a stored
/// mirror `(j, i, v)` with bitwise-equal value.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Sums duplicate triplets and checks exact symmetry.
    ///
    /// Duplicates are summed in insertion order, so an assembly loop that
    /// pushes `(i, j)` and `(j, i)` from the same local value produces
    /// bitwise-symmetric sums.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(LinalgError::IndexOutOfBounds { row: i, col: j, n });
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        // bucket by row keeping insertion order
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let slot = next[i];
            cols[slot] = j;
            vals[slot] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..n {
            let (lo, hi) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(lo..hi);
            // stable: equal columns keep insertion order
            order.sort_by_key(|&s| cols[s]);
            let mut last: Option<usize> = None;
            for &s in &order {
                if last == Some(cols[s]) {
                    *values.last_mut().unwrap() += vals[s];
                } else {
                    col_idx.push(cols[s]);
                    values.push(vals[s]);
                    last = Some(cols[s]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Builds from raw CSR arrays, validating every structural invariant.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != col_idx.len() {
            return Err(LinalgError::InvalidStructure("row_ptr length or bounds".into()));
        }
        if col_idx.len() != values.len() {
            return Err(LinalgError::InvalidStructure("col_idx/values length".into()));
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(LinalgError::InvalidStructure(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidStructure(format!(
                    "columns of row {i} not strictly increasing"
                )));
            }
            if cols.iter().any(|&j| j >= n) {
                return Err(LinalgError::IndexOutOfBounds {
                    row: i,
                    col: *cols.iter().max().unwrap(),
                    n,
                });
            }
        }
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Keeps only entries with `|v| > drop_below` from a dense symmetric matrix.
    pub fn from_dense(a: &DenseMatrix, drop_below: f64) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let mut trip = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a[(i, j)];
                if v.abs() > drop_below {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.rows(), &trip)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    fn check_symmetric(&self) -> Result<(), LinalgError> {
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                match self.get(j, i) {
                    Some(v) if v == self.values[p] => {}
                    _ => return Err(LinalgError::NotSymmetric { row: i, col: j }),
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|p| self.values[r.start + p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).unwrap_or(0.0)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `self · X` for a row-major n×k block.
    pub fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.rows(), self.n, "mul_dense shape mismatch");
        let k = x.cols();
        let mut out = DenseMatrix::zeros(self.n, k);
        for i in 0..self.n {
            let o = out.row_mut(i);
            for (j, v) in self.row(i) {
                for (oc, xc) in o.iter_mut().zip(x.row(j)) {
                    *oc += v * xc;
                }
            }
        }
        out
    }

    /// Largest absolute row sum (equal to the 1-norm by symmetry).
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `a·self + b·other`; patterns may differ.
    pub fn linear_combination(&self, a: f64, other: &SparseSymMatrix, b: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.n {
            let mut p = self.row(i).peekable();
            let mut q = other.row(i).peekable();
            loop {
                match (p.peek().copied(), q.peek().copied()) {
                    (Some((jp, vp)), Some((jq, vq))) if jp == jq => {
                        col_idx.push(jp);
                        values.push(a * vp + b * vq);
                        p.next();
                        q.next();
                    }
                    (Some((jp, vp)), Some((jq, _))) if jp < jq => {
                        col_idx.push(jp);
                        values.push(a * vp);
                        p.next();
                    }
                    (Some(_), Some((jq, vq))) => {
                        col_idx.push(jq);
                        values.push(b * vq);
                        q.next();
                    }
                    (Some((jp, vp)), None) => {
                        col_idx.push(jp);
                        values.push(a * vp);
                        p.next();
                    }
                    (None, Some((jq, vq))) => {
                        col_idx.push(jq);
                        values.push(b * vq);
                        q.next();
                    }
                    (None, None) => break,
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Principal submatrix on the kept indices (ascending, unique).
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old in keep {
            for (j, v) in self.row(old) {
                if map[j] != usize::MAX {
                    col_idx.push(map[j]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Max-abs entry of `self - other` over the union pattern.
    pub fn max_abs_diff(&self, other: &SparseSymMatrix) -> f64 {
        self.linear_combination(1.0, other, -1.0).max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(m.get(0, 0), Some(3.0));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let err = SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0)]).unwrap_err();
        assert!(matches!(err, LinalgError::NotSymmetric { .. }));
        let err = SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.5)]).unwrap_err();
        assert!(matches!(err, LinalgError::NotSymmetric { .. }));
    }

    #[test]
    fn csr_validation() {
        assert!(SparseSymMatrix::from_csr(2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(SparseSymMatrix::from_csr(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseSymMatrix::from_csr(2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let a = lap1d(6);
        let x: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).cos()).collect();
        let d = a.to_dense().matvec(&x);
        let s = a.matvec(&x);
        for (u, v) in d.iter().zip(&s) {
            assert!((u - v).abs() < 1e-15);
        }
        assert_eq!(a.bandwidth(), 1);
        assert_eq!(a.norm1(), 4.0);
    }

    #[test]
    fn linear_combination_and_submatrix() {
        let a = lap1d(4);
        let i = SparseSymMatrix::identity(4);
        let s = a.linear_combination(1.0, &i, 3.0);
        assert_eq!(s.diagonal(), vec![5.0; 4]);
        assert_eq!(s.get(0, 1), Some(-1.0));
        let sub = a.principal_submatrix(&[1, 2, 3]);
        assert_eq!(sub.dim(), 3);
        assert_eq!(sub.get(0, 0), Some(2.0));
        assert_eq!(sub.get(0, 1), Some(-1.0));
    }
}
