use std::sync::Arc;

use rbeig_core::fem::problems::{self, builtin};
use rbeig_core::fem::{
    assemble, assemble_affine_terms, build_mesh, Domain, FemError, Mesh, MeshSpec, ParametricProblem,
};
use rbeig_core::linalg::{cholesky, gen_eig_dense, SparseSymMatrix};

fn mesh_for(p: &ParametricProblem, h: f64, order: usize) -> Mesh {
    build_mesh(&MeshSpec {
        domain: p.domain.clone(),
        h,
        element_order: order,
    })
    .unwrap()
}

fn assert_bitwise_symmetric(a: &SparseSymMatrix) {
    let n = a.dim();
    for i in 0..n {
        for (j, v) in a.row(i) {
            assert_eq!(a.get(j, i).map(f64::to_bits), Some(v.to_bits()), "({i},{j})");
        }
    }
}

#[test]
fn interval_dof_count_matches_dirichlet_at_left_end() {
    let p = problems::laplace_robin_1d();
    let m = mesh_for(&p, 1.0 / 2000.0, 1);
    let sys = assemble(&p, &m, &[1.0]).unwrap();
    // 2001 nodes, one of them constrained
    assert_eq!(sys.a.dim(), 2000);
    assert_eq!(sys.dofs.len(), 2000);
}

#[test]
fn square_and_oscillator_dof_counts() {
    let p = problems::gaussian_well_2d();
    let m = mesh_for(&p, 1.0 / 128.0, 1);
    assert_eq!(m.num_nodes(), 16641);
    let p = problems::harmonic_oscillator_1d();
    let m = mesh_for(&p, 1.0 / 50.0, 1);
    assert_eq!(m.num_nodes(), 2001);
}

#[test]
fn fichera_dirichlet_everywhere() {
    let p = problems::fichera_diffusion_3d();
    let m = mesh_for(&p, 0.5, 1);
    assert_eq!(m.num_elements(), 56);
    let sys = assemble(&p, &m, &[10.0]).unwrap();
    // interior grid nodes 3³ minus the 2³ with all coordinates ≤ 0
    assert_eq!(sys.a.dim(), 27 - 8);
    let m8 = mesh_for(&p, 1.0 / 8.0, 1);
    let sys = assemble(&p, &m8, &[0.0]).unwrap();
    assert_eq!(sys.a.dim(), 15 * 15 * 15 - 8 * 8 * 8);
}

#[test]
fn p1_interior_stencils() {
    let p = problems::laplace_robin_1d();
    let h = 1.0 / 20.0;
    let m = mesh_for(&p, h, 1);
    let sys = assemble(&p, &m, &[3.0]).unwrap();
    let i = 7;
    let tol = 1e-12;
    assert!((sys.a.get(i, i - 1).unwrap() + 1.0 / h).abs() < tol / h);
    assert!((sys.a.get(i, i).unwrap() - 2.0 / h).abs() < tol / h);
    assert!((sys.a.get(i, i + 1).unwrap() + 1.0 / h).abs() < tol / h);
    assert!((sys.m.get(i, i - 1).unwrap() - h / 6.0).abs() < tol);
    assert!((sys.m.get(i, i).unwrap() - 4.0 * h / 6.0).abs() < tol);
    assert!((sys.m.get(i, i + 1).unwrap() - h / 6.0).abs() < tol);
    assert_eq!(sys.a.get(i, i + 2), None);
}

#[test]
fn robin_term_is_a_single_boundary_entry() {
    let p = problems::laplace_robin_1d();
    let m = mesh_for(&p, 1.0 / 50.0, 1);
    let a0 = assemble(&p, &m, &[0.0]).unwrap().a;
    let mu = 7.25;
    let a1 = assemble(&p, &m, &[mu]).unwrap().a;
    let n = a0.dim();
    let diff = a1.linear_combination(1.0, &a0, -1.0);
    for i in 0..n {
        for (j, v) in diff.row(i) {
            if i == n - 1 && j == n - 1 {
                assert!((v - mu).abs() < 1e-12);
            } else {
                assert!(v.abs() < 1e-12, "({i},{j}) = {v}");
            }
        }
    }
}

#[test]
fn assembled_matrices_are_symmetric_and_mass_is_spd() {
    let cases: [(&str, f64, usize, Vec<f64>); 6] = [
        (problems::LAPLACE_ROBIN_1D, 1.0 / 40.0, 1, vec![4.0]),
        (problems::HARMONIC_OSCILLATOR_1D, 1.0 / 2.0, 1, vec![2.0, 0.3]),
        (problems::GAUSSIAN_WELL_2D, 1.0 / 8.0, 1, vec![1.0]),
        (problems::GAUSSIAN_WELL_2D, 1.0 / 4.0, 2, vec![-3.0]),
        (problems::DIATOMIC_WELL_3D, 1.0 / 4.0, 1, vec![0.5]),
        (problems::FICHERA_DIFFUSION_3D, 1.0 / 2.0, 2, vec![10.0]),
    ];
    for (name, h, order, mu) in cases {
        let p = builtin(name).unwrap();
        let m = mesh_for(&p, h, order);
        let sys = assemble(&p, &m, &mu).unwrap();
        assert_bitwise_symmetric(&sys.a);
        assert_bitwise_symmetric(&sys.m);
        cholesky(&sys.m.to_dense()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn constant_is_in_the_neumann_kernel() {
    // σ = 1, ρ = 0, pure Neumann on several boxes and element orders
    for (domain, order) in [
        (Domain::interval(0.0, 2.0), 1),
        (Domain::unit_square(), 1),
        (Domain::unit_square(), 2),
        (Domain::unit_cube(), 1),
    ] {
        let mut p = problems::gaussian_well_2d();
        p.domain = domain.clone();
        p.rho = None;
        let m = mesh_for(&p, 0.25, order);
        let sys = assemble(&p, &m, &[0.0]).unwrap();
        let ones = vec![1.0; sys.a.dim()];
        let r = sys.a.matvec(&ones);
        let rn = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(rn <= 1e-10 * sys.a.norm1(), "{domain:?} order {order}: {rn}");
        // and the mass integrates the constant to the domain volume
        let vol: f64 = sys.m.matvec(&ones).iter().sum();
        let (lo, hi) = domain.bounds();
        let expect: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        assert!((vol - expect).abs() < 1e-12);
    }
}

#[test]
fn fichera_volume_is_seven_octants() {
    let p = problems::fichera_diffusion_3d();
    for order in [1, 2] {
        let m = mesh_for(&p, 0.5, order);
        // M without Dirichlet elimination: swap β to Neumann
        let mut q = p.clone();
        q.beta = Arc::new(|_, _, _| 1.0);
        q.alpha = Arc::new(|_, _, _| 0.0);
        let sys = assemble(&q, &m, &[0.0]).unwrap();
        let ones = vec![1.0; sys.m.dim()];
        let vol: f64 = sys.m.matvec(&ones).iter().sum();
        assert!((vol - 7.0).abs() < 1e-12, "order {order}: {vol}");
    }
}

fn affine_mismatch(name: &str, h: f64, order: usize, mus: &[Vec<f64>]) -> f64 {
    let p = builtin(name).unwrap();
    let m = mesh_for(&p, h, order);
    let aff = assemble_affine_terms(&p, &m).unwrap();
    let mut worst = 0.0_f64;
    for mu in mus {
        let direct = assemble(&p, &m, mu).unwrap();
        assert_eq!(direct.dofs, aff.dofs);
        let (a, mm) = aff.evaluate(mu);
        let scale = direct.a.max_abs().max(1.0);
        worst = worst.max(a.max_abs_diff(&direct.a) / scale);
        worst = worst.max(mm.max_abs_diff(&direct.m) / direct.m.max_abs().max(1.0));
    }
    worst
}

#[test]
fn affine_forms_reproduce_direct_assembly() {
    let mus: Vec<Vec<f64>> = (0..=40).map(|t| vec![0.25 * t as f64]).collect();
    assert!(affine_mismatch(problems::LAPLACE_ROBIN_1D, 1.0 / 200.0, 1, &mus) <= 1e-12);
    let mus: Vec<Vec<f64>> = [(1.0, 0.0), (3.0, 0.8), (2.25, 0.35)]
        .iter()
        .map(|&(a, b)| vec![a, b])
        .collect();
    assert!(affine_mismatch(problems::HARMONIC_OSCILLATOR_1D, 1.0 / 10.0, 1, &mus) <= 1e-12);
    let mus = vec![vec![0.0], vec![10.0], vec![20.0]];
    assert!(affine_mismatch(problems::FICHERA_DIFFUSION_3D, 1.0 / 4.0, 1, &mus) <= 1e-12);
    assert!(affine_mismatch(problems::FICHERA_DIFFUSION_3D, 1.0 / 2.0, 2, &mus) <= 1e-12);
}

#[test]
fn affine_robin_term_is_single_entry() {
    let p = problems::laplace_robin_1d();
    let m = mesh_for(&p, 1.0 / 10.0, 1);
    let aff = assemble_affine_terms(&p, &m).unwrap();
    assert_eq!(aff.a_terms.len(), 2);
    let e = &aff.a_terms[1];
    assert_eq!(e.nnz(), 1);
    assert_eq!(e.get(9, 9), Some(1.0));
    assert_eq!(aff.theta_a(&[3.5]), vec![1.0, 3.5]);
}

#[test]
fn gaussian_problems_have_no_affine_form() {
    for name in [problems::GAUSSIAN_WELL_2D, problems::DIATOMIC_WELL_3D] {
        let p = builtin(name).unwrap();
        let m = mesh_for(&p, 0.5, 1);
        assert!(matches!(assemble_affine_terms(&p, &m), Err(FemError::NoAffineForm(_))));
    }
}

#[test]
fn non_finite_coefficient_is_reported() {
    let mut p = problems::gaussian_well_2d();
    p.rho = Some(Arc::new(|x, _| if x[0] > 0.5 { f64::NAN } else { 0.0 }));
    let m = mesh_for(&p, 0.25, 1);
    assert!(matches!(
        assemble(&p, &m, &[0.0]),
        Err(FemError::QuadratureDomainError { .. })
    ));
}

#[test]
fn parameter_outside_domain_is_rejected() {
    let p = problems::laplace_robin_1d();
    let m = mesh_for(&p, 0.1, 1);
    assert!(matches!(
        assemble(&p, &m, &[11.0]),
        Err(FemError::ParameterOutOfDomain(_))
    ));
}

#[test]
fn dirichlet_neumann_spectrum_converges_quadratically() {
    let p = problems::laplace_robin_1d();
    let exact = |k: usize| ((2 * k - 1) as f64 * std::f64::consts::FRAC_PI_2).powi(2);
    let err = |h: f64| {
        let m = mesh_for(&p, h, 1);
        let sys = assemble(&p, &m, &[0.0]).unwrap();
        let s = gen_eig_dense(&sys.a.to_dense(), &sys.m.to_dense()).unwrap();
        (1..=3).map(|k| (s.values[k - 1] - exact(k)).abs()).collect::<Vec<_>>()
    };
    let coarse = err(1.0 / 50.0);
    let fine = err(1.0 / 100.0);
    for k in 0..3 {
        let ratio = coarse[k] / fine[k];
        assert!((ratio - 4.0).abs() <= 0.15 * 4.0, "k={} ratio={ratio}", k + 1);
    }
}

#[test]
fn quadratic_elements_converge_faster() {
    let p = problems::laplace_robin_1d();
    let exact = (std::f64::consts::FRAC_PI_2).powi(2);
    let m1 = mesh_for(&p, 1.0 / 20.0, 1);
    let m2 = mesh_for(&p, 1.0 / 20.0, 2);
    let e = |m: &Mesh| {
        let sys = assemble(&p, m, &[0.0]).unwrap();
        let s = gen_eig_dense(&sys.a.to_dense(), &sys.m.to_dense()).unwrap();
        (s.values[0] - exact).abs()
    };
    assert!(e(&m2) < 1e-3 * e(&m1));
}
