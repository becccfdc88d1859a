//! Uniform tensor-product meshes and Lagrange finite element assembly of
//! the parametric stiffness/mass pencil.

mod assembly;
pub mod basis;
mod mesh;
mod problem;
pub mod problems;
pub mod quadrature;

pub use assembly::{
    assemble, assemble_affine_terms, assemble_fields, dof_map, quadrature_points, AffineOperators, Assembled,
    DofMap,
};
pub use mesh::{build_mesh, write_point_cloud, BoundaryFacet, BoundaryLabel, Domain, Element, Mesh, MeshSpec};
pub use problem::{
    AffineForm, AffineTerm, BoundaryField, BoundaryWeight, Field, FieldSet, ParamBox, ParamField, ParametricProblem,
    Theta,
};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("incompatible resolution: {0}")]
    IncompatibleResolution(String),
    #[error("unsupported element order {0} (expected 1 or 2)")]
    UnsupportedElementOrder(usize),
    #[error("{what} is not finite at x = {point:?}")]
    QuadratureDomainError { point: Vec<f64>, what: &'static str },
    #[error("problem '{0}' has no affine parameter decomposition")]
    NoAffineForm(String),
    #[error("parameter {0:?} lies outside the parameter domain")]
    ParameterOutOfDomain(Vec<f64>),
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
