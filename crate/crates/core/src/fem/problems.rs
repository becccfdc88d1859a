//! Built-in parametric eigenproblems.

use std::sync::Arc;

use super::mesh::{BoundaryLabel, Domain};
use super::problem::{AffineForm, AffineTerm, FieldSet, ParamBox, ParametricProblem};
use super::FemError;

pub const LAPLACE_ROBIN_1D: &str = "laplace_robin_1d";
pub const HARMONIC_OSCILLATOR_1D: &str = "harmonic_oscillator_1d";
pub const GAUSSIAN_WELL_2D: &str = "gaussian_well_2d";
pub const DIATOMIC_WELL_3D: &str = "diatomic_well_3d";
pub const FICHERA_DIFFUSION_3D: &str = "fichera_diffusion_3d";

pub const NAMES: [&str; 5] = [
    LAPLACE_ROBIN_1D,
    HARMONIC_OSCILLATOR_1D,
    GAUSSIAN_WELL_2D,
    DIATOMIC_WELL_3D,
    FICHERA_DIFFUSION_3D,
];

pub fn description(name: &str) -> Option<&'static str> {
    Some(match name {
        LAPLACE_ROBIN_1D => "-u'' = λu on (0,1), u(0)=0, u'(1) + μu(1) = 0; μ ∈ [0,10]",
        HARMONIC_OSCILLATOR_1D => "-u'' + μ1²(x+2-4μ2)²u = λu on (-20,20), Neumann; μ ∈ [1,3]×[0,1]",
        GAUSSIAN_WELL_2D => "-Δu - 1200·exp(-1024|x-x0(μ)|²)u = λu on (0,1)², Neumann; μ ∈ [-5,5]",
        DIATOMIC_WELL_3D => "-Δu/324 + two-center Gaussian well potential on (0,1)³, Neumann; μ ∈ [-2,2]",
        FICHERA_DIFFUSION_3D => "-div((1+μχ_B)∇u) = λu on the Fichera cube, Dirichlet; μ ∈ [0,20]",
        _ => return None,
    })
}

pub fn builtin(name: &str) -> Result<ParametricProblem, FemError> {
    match name {
        LAPLACE_ROBIN_1D => Ok(laplace_robin_1d()),
        HARMONIC_OSCILLATOR_1D => Ok(harmonic_oscillator_1d()),
        GAUSSIAN_WELL_2D => Ok(gaussian_well_2d()),
        DIATOMIC_WELL_3D => Ok(diatomic_well_3d()),
        FICHERA_DIFFUSION_3D => Ok(fichera_diffusion_3d()),
        other => Err(FemError::UnknownProblem(other.to_string())),
    }
}

fn neumann() -> (super::BoundaryField, super::BoundaryField) {
    (Arc::new(|_, _, _| 0.0), Arc::new(|_, _, _| 1.0))
}

/// Laplacian on the unit interval, Dirichlet at 0, Robin `u' + μu = 0` at 1.
pub fn laplace_robin_1d() -> ParametricProblem {
    let affine = AffineForm {
        stiffness: vec![
            AffineTerm::new(|_| 1.0, FieldSet::stiffness(|_| 1.0)),
            AffineTerm::new(
                |mu| mu[0],
                FieldSet::boundary(|_, l| if l == BoundaryLabel::Upper(0) { 1.0 } else { 0.0 }),
            ),
        ],
        mass: vec![AffineTerm::new(|_| 1.0, FieldSet::mass(|_| 1.0))],
    };
    ParametricProblem {
        name: LAPLACE_ROBIN_1D.into(),
        domain: Domain::interval(0.0, 1.0),
        params: ParamBox::new(vec![0.0], vec![10.0]),
        sigma: Arc::new(|_, _| 1.0),
        rho: None,
        alpha: Arc::new(|_, l, mu| if l == BoundaryLabel::Lower(0) { 1.0 } else { mu[0] }),
        beta: Arc::new(|_, l, _| if l == BoundaryLabel::Lower(0) { 0.0 } else { 1.0 }),
        affine: Some(affine),
    }
}

/// Shifted harmonic oscillator on `(−20, 20)` with Neumann truncation.
///
/// The potential is a quadratic polynomial in `x`, so it splits into three
/// parameter-independent mass-type terms.
pub fn harmonic_oscillator_1d() -> ParametricProblem {
    let center = |mu: &[f64]| 2.0 - 4.0 * mu[1];
    let affine = AffineForm {
        stiffness: vec![
            AffineTerm::new(|_| 1.0, FieldSet::stiffness(|_| 1.0)),
            AffineTerm::new(|mu| mu[0] * mu[0], FieldSet::mass(|x| x[0] * x[0])),
            AffineTerm::new(move |mu| 2.0 * mu[0] * mu[0] * center(mu), FieldSet::mass(|x| x[0])),
            AffineTerm::new(move |mu| (mu[0] * center(mu)).powi(2), FieldSet::mass(|_| 1.0)),
        ],
        mass: vec![AffineTerm::new(|_| 1.0, FieldSet::mass(|_| 1.0))],
    };
    let (alpha, beta) = neumann();
    ParametricProblem {
        name: HARMONIC_OSCILLATOR_1D.into(),
        domain: Domain::interval(-20.0, 20.0),
        params: ParamBox::new(vec![1.0, 0.0], vec![3.0, 1.0]),
        sigma: Arc::new(|_, _| 1.0),
        rho: Some(Arc::new(move |x, mu| {
            let s = x[0] + center(mu);
            mu[0] * mu[0] * s * s
        })),
        alpha,
        beta,
        affine: Some(affine),
    }
}

/// Single Gaussian well on the unit square whose center moves with `μ`.
pub fn gaussian_well_2d() -> ParametricProblem {
    let (alpha, beta) = neumann();
    ParametricProblem {
        name: GAUSSIAN_WELL_2D.into(),
        domain: Domain::unit_square(),
        params: ParamBox::new(vec![-5.0], vec![5.0]),
        sigma: Arc::new(|_, _| 1.0),
        rho: Some(Arc::new(|x, mu| {
            let dx = x[0] - (0.5 + mu[0] / 128.0);
            let dy = x[1] - 0.5;
            -1200.0 * (-1024.0 * (dx * dx + dy * dy)).exp()
        })),
        alpha,
        beta,
        affine: None,
    }
}

/// Two-center well on the unit cube; `μ` moves the centers apart.
pub fn diatomic_well_3d() -> ParametricProblem {
    const AMPLITUDE: [f64; 2] = [-28.9, -3.6];
    const RADIUS: [f64; 2] = [7.0 / 450.0, 3.0 / 50.0];
    let (alpha, beta) = neumann();
    ParametricProblem {
        name: DIATOMIC_WELL_3D.into(),
        domain: Domain::unit_cube(),
        params: ParamBox::new(vec![-2.0], vec![2.0]),
        sigma: Arc::new(|_, _| 1.0 / 324.0),
        rho: Some(Arc::new(|x, mu| {
            let centers = [13.0 / 36.0 - mu[0] / 128.0, 23.0 / 36.0 + mu[0] / 128.0];
            let yz = (x[1] - 0.5).powi(2) + (x[2] - 0.5).powi(2);
            let mut v = 0.0;
            for (a, r) in AMPLITUDE.iter().zip(RADIUS) {
                for c in centers {
                    let d2 = (x[0] - c).powi(2) + yz;
                    v += a * (-d2 / (2.0 * r * r)).exp();
                }
            }
            v
        })),
        alpha,
        beta,
        affine: None,
    }
}

/// `|x|∞ ≤ 1/4`.
pub fn in_contrast_box(x: &[f64]) -> bool {
    x.iter().all(|v| v.abs() <= 0.25)
}

/// Diffusion on the Fichera cube with conductivity `1 + μ` in a central box.
pub fn fichera_diffusion_3d() -> ParametricProblem {
    let chi = |x: &[f64]| if in_contrast_box(x) { 1.0 } else { 0.0 };
    let affine = AffineForm {
        stiffness: vec![
            AffineTerm::new(|_| 1.0, FieldSet::stiffness(|_| 1.0)),
            AffineTerm::new(|mu| mu[0], FieldSet::stiffness(chi)),
        ],
        mass: vec![AffineTerm::new(|_| 1.0, FieldSet::mass(|_| 1.0))],
    };
    ParametricProblem {
        name: FICHERA_DIFFUSION_3D.into(),
        domain: Domain::Fichera,
        params: ParamBox::new(vec![0.0], vec![20.0]),
        sigma: Arc::new(move |x, mu| 1.0 + mu[0] * chi(x)),
        rho: None,
        alpha: Arc::new(|_, _, _| 1.0),
        beta: Arc::new(|_, _, _| 0.0),
        affine: Some(affine),
    }
}
