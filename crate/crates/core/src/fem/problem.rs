use std::fmt;
use std::sync::Arc;

use super::mesh::{BoundaryLabel, Domain};

/// Coefficient field `f(x, μ)`.
pub type ParamField = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Boundary coefficient `g(x, label, μ)`.
pub type BoundaryField = Arc<dyn Fn(&[f64], BoundaryLabel, &[f64]) -> f64 + Send + Sync>;
/// Parameter-independent field `f(x)`.
pub type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Parameter-independent boundary weight `g(x, label)`.
pub type BoundaryWeight = Arc<dyn Fn(&[f64], BoundaryLabel) -> f64 + Send + Sync>;
/// Scalar coefficient `θ(μ)` of an affine term.
pub type Theta = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Axis-aligned parameter box.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        let tol = 1e-12;
        mu.len() == self.dim()
            && mu
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(m, (l, h))| *m >= l - tol * l.abs().max(1.0) && *m <= h + tol * h.abs().max(1.0))
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

/// The weak form `∫ σ∇u·∇v + ρuv + ∫_∂ (α/β) uv = λ ∫ uv` on a domain,
/// with `β = 0` marking Dirichlet boundary.
#[derive(Clone)]
pub struct ParametricProblem {
    pub name: String,
    pub domain: Domain,
    pub params: ParamBox,
    pub sigma: ParamField,
    /// `None` means zero potential.
    pub rho: Option<ParamField>,
    pub alpha: BoundaryField,
    pub beta: BoundaryField,
    pub affine: Option<AffineForm>,
}

impl fmt::Debug for ParametricProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .field("affine_terms", &self.affine.as_ref().map(|a| (a.stiffness.len(), a.mass.len())))
            .finish()
    }
}

/// Parameter-independent integrands assembled into one matrix.
#[derive(Clone, Default)]
pub struct FieldSet {
    /// Weight of `∇u·∇v`.
    pub stiffness: Option<Field>,
    /// Weight of `uv` over the volume.
    pub mass: Option<Field>,
    /// Weight of `uv` over non-Dirichlet boundary facets.
    pub boundary: Option<BoundaryWeight>,
}

impl FieldSet {
    pub fn stiffness(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            stiffness: Some(Arc::new(f)),
            ..Default::default()
        }
    }

    pub fn mass(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            mass: Some(Arc::new(f)),
            ..Default::default()
        }
    }

    pub fn boundary(f: impl Fn(&[f64], BoundaryLabel) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            boundary: Some(Arc::new(f)),
            ..Default::default()
        }
    }
}

#[derive(Clone)]
pub struct AffineTerm {
    pub theta: Theta,
    pub fields: FieldSet,
}

impl AffineTerm {
    pub fn new(theta: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, fields: FieldSet) -> Self {
        Self {
            theta: Arc::new(theta),
            fields,
        }
    }
}

/// `A(μ) = Σ θ_q(μ) A_q`, `M(μ) = Σ θ^M_q(μ) M_q`.
#[derive(Clone)]
pub struct AffineForm {
    pub stiffness: Vec<AffineTerm>,
    pub mass: Vec<AffineTerm>,
}

impl AffineForm {
    pub fn theta_a(&self, mu: &[f64]) -> Vec<f64> {
        self.stiffness.iter().map(|t| (t.theta)(mu)).collect()
    }

    pub fn theta_m(&self, mu: &[f64]) -> Vec<f64> {
        self.mass.iter().map(|t| (t.theta)(mu)).collect()
    }
}
