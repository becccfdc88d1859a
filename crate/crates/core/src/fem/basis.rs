/// Equispaced Lagrange shape functions of degree 1 or 2 on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lagrange1d {
    order: usize,
}

impl Lagrange1d {
    pub fn new(order: usize) -> Self {
        assert!(order == 1 || order == 2, "only linear and quadratic elements are supported");
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        self.order + 1
    }

    /// Shape function values at `t`.
    pub fn values(&self, t: f64) -> Vec<f64> {
        match self.order {
            1 => vec![1.0 - t, t],
            _ => vec![2.0 * (t - 0.5) * (t - 1.0), 4.0 * t * (1.0 - t), 2.0 * t * (t - 0.5)],
        }
    }

    /// Shape function derivatives with respect to `t`.
    pub fn derivatives(&self, t: f64) -> Vec<f64> {
        match self.order {
            1 => vec![-1.0, 1.0],
            _ => vec![4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0],
        }
    }
}

/// Tensor-product shape data at every tensor quadrature point.
///
/// Local node `a` has multi-index `(a % k, (a / k) % k, a / k²)` with
/// `k = order + 1` — the first coordinate varies fastest.
#[derive(Clone, Debug)]
pub struct TensorShapeTable {
    pub dim: usize,
    pub num_local: usize,
    /// Reference coordinates of each quadrature point.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// `values[q][a]`
    pub values: Vec<Vec<f64>>,
    /// `grads[q][a][d]` in reference coordinates.
    pub grads: Vec<Vec<[f64; 3]>>,
}

impl TensorShapeTable {
    pub fn new(dim: usize, basis: Lagrange1d, pts: &[f64], wts: &[f64]) -> Self {
        assert!((1..=3).contains(&dim));
        let k = basis.num_nodes();
        let nq1 = pts.len();
        let nq = nq1.pow(dim as u32);
        let num_local = k.pow(dim as u32);
        let v1: Vec<Vec<f64>> = pts.iter().map(|&t| basis.values(t)).collect();
        let d1: Vec<Vec<f64>> = pts.iter().map(|&t| basis.derivatives(t)).collect();

        let mut points = Vec::with_capacity(nq);
        let mut weights = Vec::with_capacity(nq);
        let mut values = Vec::with_capacity(nq);
        let mut grads = Vec::with_capacity(nq);
        for q in 0..nq {
            let qi = split(q, nq1, dim);
            let mut xi = [0.0; 3];
            let mut w = 1.0;
            for d in 0..dim {
                xi[d] = pts[qi[d]];
                w *= wts[qi[d]];
            }
            let mut vals = vec![0.0; num_local];
            let mut gr = vec![[0.0; 3]; num_local];
            for a in 0..num_local {
                let ai = split(a, k, dim);
                let mut v = 1.0;
                for d in 0..dim {
                    v *= v1[qi[d]][ai[d]];
                }
                vals[a] = v;
                for g in 0..dim {
                    let mut p = 1.0;
                    for d in 0..dim {
                        p *= if d == g { d1[qi[d]][ai[d]] } else { v1[qi[d]][ai[d]] };
                    }
                    gr[a][g] = p;
                }
            }
            points.push(xi);
            weights.push(w);
            values.push(vals);
            grads.push(gr);
        }
        Self {
            dim,
            num_local,
            points,
            weights,
            values,
            grads,
        }
    }

    pub fn num_points(&self) -> usize {
        self.weights.len()
    }
}

/// Splits a flat index into `dim` digits in base `k`, first digit fastest.
pub(crate) fn split(mut idx: usize, k: usize, dim: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for o in out.iter_mut().take(dim) {
        *o = idx % k;
        idx /= k;
    }
    out
}
