use rayon::prelude::*;

use super::basis::{split, Lagrange1d, TensorShapeTable};
use super::mesh::{BoundaryLabel, Mesh};
use super::problem::{FieldSet, ParametricProblem};
use super::quadrature::GaussLegendre;
use super::FemError;
use crate::linalg::SparseSymMatrix;

/// Map between mesh nodes and unknowns after Dirichlet elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    /// Mesh node of each unknown, ascending.
    pub free_nodes: Vec<usize>,
    /// Unknown of each mesh node, `None` where constrained.
    pub node_to_dof: Vec<Option<usize>>,
    /// Per boundary facet: whether it is Dirichlet.
    pub dirichlet_facets: Vec<bool>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free_nodes.is_empty()
    }

    /// Extends a vector of unknowns to all mesh nodes (zero on Dirichlet).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.node_to_dof.iter().map(|d| d.map_or(0.0, |i| x[i])).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub a: SparseSymMatrix,
    pub m: SparseSymMatrix,
    pub dofs: DofMap,
}

/// Parameter-independent operators with their coefficient functions.
#[derive(Clone)]
pub struct AffineOperators {
    pub a_terms: Vec<SparseSymMatrix>,
    pub m_terms: Vec<SparseSymMatrix>,
    pub form: super::problem::AffineForm,
    pub dofs: DofMap,
}

impl AffineOperators {
    pub fn theta_a(&self, mu: &[f64]) -> Vec<f64> {
        self.form.theta_a(mu)
    }

    pub fn theta_m(&self, mu: &[f64]) -> Vec<f64> {
        self.form.theta_m(mu)
    }

    /// `(Σ θ_q(μ) A_q, Σ θ^M_q(μ) M_q)`.
    pub fn evaluate(&self, mu: &[f64]) -> (SparseSymMatrix, SparseSymMatrix) {
        (
            combine(&self.a_terms, &self.theta_a(mu)),
            combine(&self.m_terms, &self.theta_m(mu)),
        )
    }
}

fn combine(terms: &[SparseSymMatrix], theta: &[f64]) -> SparseSymMatrix {
    let mut acc = terms[0].scale(theta[0]);
    for (t, th) in terms.iter().zip(theta).skip(1) {
        acc = acc.linear_combination(1.0, t, *th);
    }
    acc
}

/// Marks facets with `β = 0` at their center as Dirichlet and numbers the
/// remaining nodes.
pub fn dof_map(problem: &ParametricProblem, mesh: &Mesh, mu: &[f64]) -> DofMap {
    let mut constrained = vec![false; mesh.num_nodes()];
    let mut dirichlet_facets = Vec::with_capacity(mesh.boundary_facets.len());
    for f in &mesh.boundary_facets {
        let c = mesh.facet_center(f);
        let is_d = (problem.beta)(&c[..mesh.dim], f.label, mu) == 0.0;
        dirichlet_facets.push(is_d);
        if is_d {
            let el = &mesh.elements[f.element];
            for a in mesh.facet_local_nodes(f.axis, f.side) {
                constrained[el.nodes[a]] = true;
            }
        }
    }
    let mut node_to_dof = vec![None; mesh.num_nodes()];
    let mut free_nodes = Vec::new();
    for (node, c) in constrained.iter().enumerate() {
        if !c {
            node_to_dof[node] = Some(free_nodes.len());
            free_nodes.push(node);
        }
    }
    DofMap {
        free_nodes,
        node_to_dof,
        dirichlet_facets,
    }
}

type VolumeFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);
type SurfaceFn<'a> = &'a (dyn Fn(&[f64], BoundaryLabel) -> f64 + Sync);

struct Integrands<'a> {
    stiffness: Option<VolumeFn<'a>>,
    mass: Option<VolumeFn<'a>>,
    boundary: Option<SurfaceFn<'a>>,
}

/// Assembles `A(μ)` and `M` for one parameter value.
pub fn assemble(problem: &ParametricProblem, mesh: &Mesh, mu: &[f64]) -> Result<Assembled, FemError> {
    if !problem.params.contains(mu) {
        return Err(FemError::ParameterOutOfDomain(mu.to_vec()));
    }
    let dofs = dof_map(problem, mesh, mu);
    let sigma = |x: &[f64]| (problem.sigma)(x, mu);
    let rho = problem.rho.as_ref().map(|r| move |x: &[f64]| r(x, mu));
    let robin = |x: &[f64], l: BoundaryLabel| {
        let a = (problem.alpha)(x, l, mu);
        if a == 0.0 {
            0.0
        } else {
            a / (problem.beta)(x, l, mu)
        }
    };
    let a = assemble_integrands(
        mesh,
        &dofs,
        &Integrands {
            stiffness: Some(&sigma),
            mass: rho.as_ref().map(|r| r as VolumeFn),
            boundary: Some(&robin),
        },
    )?;
    let one = |_: &[f64]| 1.0;
    let m = assemble_integrands(
        mesh,
        &dofs,
        &Integrands {
            stiffness: None,
            mass: Some(&one),
            boundary: None,
        },
    )?;
    Ok(Assembled { a, m, dofs })
}

/// Assembles one parameter-independent matrix from a field set.
pub fn assemble_fields(mesh: &Mesh, dofs: &DofMap, fields: &FieldSet) -> Result<SparseSymMatrix, FemError> {
    let s = fields.stiffness.clone();
    let m = fields.mass.clone();
    let b = fields.boundary.clone();
    let sf = s.as_ref().map(|f| move |x: &[f64]| f(x));
    let mf = m.as_ref().map(|f| move |x: &[f64]| f(x));
    let bf = b.as_ref().map(|f| move |x: &[f64], l: BoundaryLabel| f(x, l));
    assemble_integrands(
        mesh,
        dofs,
        &Integrands {
            stiffness: sf.as_ref().map(|f| f as VolumeFn),
            mass: mf.as_ref().map(|f| f as VolumeFn),
            boundary: bf.as_ref().map(|f| f as SurfaceFn),
        },
    )
}

/// Assembles every affine term of the problem.
///
/// The Dirichlet set is taken at the center of the parameter box; the
/// built-in problems have parameter-independent Dirichlet boundaries.
pub fn assemble_affine_terms(problem: &ParametricProblem, mesh: &Mesh) -> Result<AffineOperators, FemError> {
    let form = problem
        .affine
        .clone()
        .ok_or_else(|| FemError::NoAffineForm(problem.name.clone()))?;
    let dofs = dof_map(problem, mesh, &problem.params.center());
    let a_terms = form
        .stiffness
        .iter()
        .map(|t| assemble_fields(mesh, &dofs, &t.fields))
        .collect::<Result<Vec<_>, _>>()?;
    let m_terms = form
        .mass
        .iter()
        .map(|t| assemble_fields(mesh, &dofs, &t.fields))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffineOperators {
        a_terms,
        m_terms,
        form,
        dofs,
    })
}

/// Quadrature points per axis: exact for polynomial degree `2·order + 3`.
pub fn quadrature_points(order: usize) -> usize {
    order + 2
}

struct FacetTable {
    local: Vec<usize>,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    /// values[q][i] for local node `local[i]`
    values: Vec<Vec<f64>>,
}

fn facet_tables(mesh: &Mesh, gl: &GaussLegendre, basis: Lagrange1d) -> Vec<[FacetTable; 2]> {
    let dim = mesh.dim;
    let k = basis.num_nodes();
    let nq1 = gl.len();
    let nq = nq1.pow(dim as u32 - 1);
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mk = |side: usize| {
            let local = mesh.facet_local_nodes(axis, side);
            let mut points = Vec::with_capacity(nq);
            let mut weights = Vec::with_capacity(nq);
            let mut values = Vec::with_capacity(nq);
            for q in 0..nq {
                let qi = split(q, nq1, dim - 1);
                let mut xi = [0.0; 3];
                let mut w = 1.0;
                let mut t = 0;
                for (d, x) in xi.iter_mut().enumerate().take(dim) {
                    if d == axis {
                        *x = side as f64;
                    } else {
                        *x = gl.points[qi[t]];
                        w *= gl.weights[qi[t]];
                        t += 1;
                    }
                }
                let v1: Vec<Vec<f64>> = (0..dim).map(|d| basis.values(xi[d])).collect();
                let vals = local
                    .iter()
                    .map(|&a| {
                        let ai = split(a, k, dim);
                        (0..dim).map(|d| v1[d][ai[d]]).product()
                    })
                    .collect();
                points.push(xi);
                weights.push(w);
                values.push(vals);
            }
            FacetTable {
                local,
                points,
                weights,
                values,
            }
        };
        out.push([mk(0), mk(1)]);
    }
    out
}

fn check(v: f64, x: &[f64], what: &'static str) -> Result<f64, FemError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FemError::QuadratureDomainError {
            point: x.to_vec(),
            what,
        })
    }
}

fn assemble_integrands(mesh: &Mesh, dofs: &DofMap, f: &Integrands<'_>) -> Result<SparseSymMatrix, FemError> {
    let dim = mesh.dim;
    let h = mesh.h;
    let basis = Lagrange1d::new(mesh.element_order);
    let gl = GaussLegendre::new(quadrature_points(mesh.element_order));
    let table = TensorShapeTable::new(dim, basis, &gl.points, &gl.weights);
    let nl = table.num_local;
    let vol = h.powi(dim as i32);
    let inv_h2 = 1.0 / (h * h);

    let chunk = 256;
    let volume: Vec<Vec<(usize, usize, f64)>> = mesh
        .elements
        .par_chunks(chunk)
        .map(|els| {
            let mut trip = Vec::new();
            let mut ke = vec![0.0; nl * nl];
            let mut x = [0.0; 3];
            for el in els {
                ke.iter_mut().for_each(|v| *v = 0.0);
                for q in 0..table.num_points() {
                    for d in 0..dim {
                        x[d] = el.origin[d] + h * table.points[q][d];
                    }
                    let xs = &x[..dim];
                    let w = table.weights[q] * vol;
                    let s = match f.stiffness {
                        Some(g) => check(g(xs), xs, "stiffness coefficient")?,
                        None => 0.0,
                    };
                    let r = match f.mass {
                        Some(g) => check(g(xs), xs, "mass coefficient")?,
                        None => 0.0,
                    };
                    let vals = &table.values[q];
                    let grads = &table.grads[q];
                    for a in 0..nl {
                        for b in a..nl {
                            let mut gg = 0.0;
                            for d in 0..dim {
                                gg += grads[a][d] * grads[b][d];
                            }
                            ke[a * nl + b] += w * (s * gg * inv_h2 + r * vals[a] * vals[b]);
                        }
                    }
                }
                push_local(&mut trip, &ke, nl, &el.nodes, None, dofs);
            }
            Ok(trip)
        })
        .collect::<Result<_, FemError>>()?;

    let mut all: Vec<(usize, usize, f64)> = volume.into_iter().flatten().collect();

    if let Some(g) = f.boundary {
        let tables = facet_tables(mesh, &gl, basis);
        let farea = h.powi(dim as i32 - 1);
        for (fi, facet) in mesh.boundary_facets.iter().enumerate() {
            if dofs.dirichlet_facets[fi] {
                continue;
            }
            let el = &mesh.elements[facet.element];
            let t = &tables[facet.axis][facet.side];
            let nf = t.local.len();
            let mut ke = vec![0.0; nf * nf];
            let mut any = false;
            let mut x = [0.0; 3];
            for q in 0..t.weights.len() {
                for d in 0..dim {
                    x[d] = el.origin[d] + h * t.points[q][d];
                }
                let c = check(g(&x[..dim], facet.label), &x[..dim], "boundary coefficient")?;
                if c == 0.0 {
                    continue;
                }
                any = true;
                let w = t.weights[q] * farea * c;
                for a in 0..nf {
                    for b in a..nf {
                        ke[a * nf + b] += w * t.values[q][a] * t.values[q][b];
                    }
                }
            }
            if any {
                push_local(&mut all, &ke, nf, &el.nodes, Some(&t.local), dofs);
            }
        }
    }

    // Sum upper-triangular contributions in a fixed order, then mirror so the
    // stored matrix is bitwise symmetric.
    all.sort_by_key(|&(i, j, _)| (i, j));
    let mut full = Vec::with_capacity(2 * all.len());
    let mut it = all.into_iter().peekable();
    while let Some((i, j, mut v)) = it.next() {
        while let Some(&(i2, j2, v2)) = it.peek() {
            if (i2, j2) != (i, j) {
                break;
            }
            v += v2;
            it.next();
        }
        full.push((i, j, v));
        if i != j {
            full.push((j, i, v));
        }
    }
    Ok(SparseSymMatrix::from_triplets(dofs.len(), &full)?)
}

fn push_local(
    out: &mut Vec<(usize, usize, f64)>,
    ke: &[f64],
    nl: usize,
    nodes: &[usize],
    local: Option<&[usize]>,
    dofs: &DofMap,
) {
    let node = |a: usize| nodes[local.map_or(a, |l| l[a])];
    for a in 0..nl {
        let Some(ia) = dofs.node_to_dof[node(a)] else { continue };
        for b in a..nl {
            let Some(ib) = dofs.node_to_dof[node(b)] else { continue };
            let v = ke[a * nl + b];
            if v == 0.0 {
                continue;
            }
            out.push((ia.min(ib), ia.max(ib), v));
        }
    }
}
