use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbeig_core::analysis::{
    compute_kappa, compute_kappas, compute_tau, correlation_matrix, eigvec_errors, m_project, oblique_project_a,
    partition_spectrum, rayleigh_quotient, verify_bounds, AProjector, AnalysisError, BoundOptions, BoundReport,
};
use rbeig_core::eigsolve::{lobpcg, Preconditioner, SolverOptions};
use rbeig_core::fem::problems::{self, builtin};
use rbeig_core::fem::{assemble, build_mesh, Assembled, MeshSpec};
use rbeig_core::linalg::{dot, gen_eig_dense, qr_thin, DenseMatrix, LinalgError};
use rbeig_core::rom::{build_basis, collect_snapshots, project_operators, solve_reduced, ReducedBasis};

fn system(name: &str, h: f64, mu: &[f64]) -> Assembled {
    let p = builtin(name).unwrap();
    let mesh = build_mesh(&MeshSpec {
        domain: p.domain.clone(),
        h,
        element_order: 1,
    })
    .unwrap();
    assemble(&p, &mesh, mu).unwrap()
}

fn spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let c = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut a = c.t_matmul(&c).add(&DenseMatrix::identity(n).scale(shift));
    a.symmetrize();
    a
}

fn orthonormal(n: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    qr_thin(&DenseMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0))).q
}

fn random_block(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0))
}

fn w_norm(x: &[f64], w: &DenseMatrix) -> f64 {
    dot(x, &w.matvec(x)).max(0.0).sqrt()
}

fn basis_from(q: DenseMatrix) -> ReducedBasis {
    ReducedBasis {
        q,
        training: vec![],
        pairs_per_param: 0,
        truncated: 0,
    }
}

#[test]
fn rayleigh_quotient_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = spd(12, -3.0, &mut rng);
    let m = spd(12, 0.5, &mut rng);
    let e = gen_eig_dense(&a, &m).unwrap();
    for k in 0..12 {
        let rq = rayleigh_quotient(&a, &m, &e.vector(k)).unwrap();
        assert!((rq - e.values[k]).abs() <= 1e-10 * (1.0 + e.values[k].abs()));
    }
    for _ in 0..50 {
        let (c1, c2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let x: Vec<f64> = (0..12).map(|i| c1 * e.vectors[(i, 0)] + c2 * e.vectors[(i, 1)]).collect();
        let rq = rayleigh_quotient(&a, &m, &x).unwrap();
        assert!(rq >= e.values[0] - 1e-10 && rq <= e.values[1] + 1e-10);
    }
    let x: Vec<f64> = (0..12).map(|i| (i as f64).sin() + 0.3).collect();
    assert!((rayleigh_quotient(&m, &m, &x).unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(rayleigh_quotient(&a, &m, &[0.0; 12]), Err(AnalysisError::ZeroVector));
}

#[test]
fn oblique_projector_fixes_its_range_and_kills_the_a_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 40;
    let a = spd(n, 1.0, &mut rng);
    let q = orthonormal(n, 5, &mut rng);
    // columns in span(Q)
    let x = q.matmul(&random_block(5, 3, &mut rng));
    assert!(oblique_project_a(&q, &a, &x).unwrap().sub(&x).max_abs() <= 1e-12);
    // A-orthogonal complement: Euclidean complement of span(AQ)
    let aq = a.matmul(&q);
    let full = qr_thin(&DenseMatrix::hstack(&[&aq, &random_block(n, 6, &mut rng)])).q;
    let comp = full.select_columns(&(5..11).collect::<Vec<_>>());
    assert!(q.t_matmul(&a.matmul(&comp)).max_abs() <= 1e-12);
    assert!(oblique_project_a(&q, &a, &comp).unwrap().max_abs() <= 1e-12);
}

#[test]
fn projector_needs_a_positive_definite_stiffness() {
    let sys = system(problems::DIATOMIC_WELL_3D, 1.0 / 4.0, &[0.0]);
    let e = gen_eig_dense(&sys.a.to_dense(), &sys.m.to_dense()).unwrap();
    assert!(e.values[0] < 0.0);
    let q = qr_thin(&e.vectors.leading_columns(1)).q;
    assert!(matches!(
        AProjector::new(&sys.a, &q),
        Err(LinalgError::NotPositiveDefinite { .. })
    ));
}

#[test]
fn kappa_is_one_on_a_captured_eigenspace() {
    let sys = system(problems::LAPLACE_ROBIN_1D, 1.0 / 100.0, &[3.0]);
    let e = gen_eig_dense(&sys.a.to_dense(), &sys.m.to_dense()).unwrap();
    let phi = e.vectors.leading_columns(4);
    let proj = AProjector::new(&sys.a, &qr_thin(&phi).q).unwrap();
    for k in compute_kappas(&phi, &proj, &sys.m) {
        assert!((k.value - 1.0).abs() <= 1e-10, "{}", k.value);
    }
}

#[test]
fn kappa_dominates_sampled_amplification() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 30;
    let a = spd(n, 0.5, &mut rng);
    let m = spd(n, 0.5, &mut rng);
    let e = gen_eig_dense(&a, &m).unwrap();
    let phi = e.vectors.leading_columns(2);
    // basis close to, but not containing, the eigenspace
    let q = qr_thin(&phi.add(&random_block(n, 2, &mut rng).scale(0.3))).q;
    let q = qr_thin(&DenseMatrix::hstack(&[&q, &random_block(n, 2, &mut rng)])).q;
    let proj = AProjector::new(&a, &q).unwrap();
    let kappa = compute_kappa(&phi, &proj, &m).value;
    let mut best: f64 = 0.0;
    for _ in 0..10_000 {
        let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let y: Vec<f64> = (0..n).map(|i| c[0] * phi[(i, 0)] + c[1] * phi[(i, 1)]).collect();
        let py = proj.apply(&DenseMatrix::from_columns(std::slice::from_ref(&y))).column(0);
        best = best.max(w_norm(&y, &m) / w_norm(&py, &m));
    }
    assert!(kappa >= best - 1e-9, "{kappa} < {best}");
    assert!(kappa <= best * 1.01, "supremum should be nearly attained: {kappa} vs {best}");
}

#[test]
fn kappa_is_infinite_for_a_rank_deficient_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 20;
    let a = spd(n, 1.0, &mut rng);
    let m = DenseMatrix::identity(n);
    let q = orthonormal(n, 3, &mut rng);
    // φ A-orthogonal to span(Q): P_A φ = 0
    let full = qr_thin(&DenseMatrix::hstack(&[&a.matmul(&q), &random_block(n, 1, &mut rng)])).q;
    let phi = full.select_columns(&[3]);
    let proj = AProjector::new(&a, &q).unwrap();
    let k = compute_kappa(&phi, &proj, &m);
    assert!(k.value.is_infinite());
    assert!(k.diagnostic.is_some());
}

#[test]
fn partition_examples() {
    let p = partition_spectrum(&[1.0, 1.0, 2.0], 1e-8);
    assert_eq!(p.distinct, vec![1.0, 2.0]);
    assert_eq!(p.multiplicities, vec![2, 1]);
    assert_eq!(p.cumulative, vec![2, 3]);
    assert_eq!(p.index_set(0), 0..2);
    assert_eq!(p.group_of(2), Some(1));

    let lap = system(problems::LAPLACE_ROBIN_1D, 1.0 / 500.0, &[10.0]);
    let out = lobpcg(
        &lap.a,
        &lap.m,
        &SolverOptions {
            block_size: 15,
            tol: 1e-10,
            preconditioner: Preconditioner::BandedCholesky,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let p = partition_spectrum(&out.solution.values, 1e-6);
    assert!(p.multiplicities.iter().all(|&g| g == 1));
}

#[test]
fn fichera_spectrum_has_three_double_eigenvalues() {
    let sys = system(problems::FICHERA_DIFFUSION_3D, 1.0 / 8.0, &[10.0]);
    let out = lobpcg(
        &sys.a,
        &sys.m,
        &SolverOptions {
            block_size: 9,
            tol: 1e-10,
            preconditioner: Preconditioner::BandedCholesky,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let p = partition_spectrum(&out.solution.values, 1e-6);
    assert_eq!(p.groups(), vec![0..1, 1..3, 3..4, 4..6, 6..7, 7..9]);
}

#[test]
fn tau_examples() {
    let p = partition_spectrum(&[1.0, 5.0], 1e-8);
    assert_eq!(compute_tau(&p, 0, &[1.0, 3.0]).unwrap().value, 0.5);
    let p = partition_spectrum(&[2.0, 7.0], 1e-8);
    assert_eq!(compute_tau(&p, 0, &[2.01, 2.5]).unwrap().value, 4.0);
    let p = partition_spectrum(&[2.0, 2.0], 1e-8);
    assert_eq!(
        compute_tau(&p, 0, &[2.0, 2.0]),
        Err(AnalysisError::EmptyComplement { group: 0 })
    );
    let p = partition_spectrum(&[2.0, 9.0], 1e-8);
    let t = compute_tau(&p, 0, &[1.0, 2.0]).unwrap();
    assert!(t.value.is_infinite() && t.diagnostic.is_some());
}

/// FOM pairs and a reduced basis for the Robin Laplacian at `mu`.
fn laplace_case(h: f64, train: &[f64], p: usize, mu: f64, k: usize) -> (Assembled, DenseMatrix, Vec<f64>, ReducedBasis) {
    let prob = builtin(problems::LAPLACE_ROBIN_1D).unwrap();
    let mesh = build_mesh(&MeshSpec {
        domain: prob.domain.clone(),
        h,
        element_order: 1,
    })
    .unwrap();
    let opts = SolverOptions {
        tol: 1e-11,
        preconditioner: Preconditioner::BandedCholesky,
        ..SolverOptions::default()
    };
    let train: Vec<Vec<f64>> = train.iter().map(|&x| vec![x]).collect();
    let basis = build_basis(&collect_snapshots(&prob, &mesh, &train, p, &opts).unwrap()).unwrap();
    let sys = assemble(&prob, &mesh, &[mu]).unwrap();
    let out = lobpcg(&sys.a, &sys.m, &SolverOptions { block_size: k, ..opts }).unwrap();
    (sys, out.solution.vectors, out.solution.values, basis)
}

#[test]
fn contained_eigenspace_has_zero_error_and_identity_correlation() {
    let (sys, phi, values, _) = laplace_case(1.0 / 100.0, &[1.0], 1, 3.0, 4);
    let basis = basis_from(qr_thin(&phi).q);
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let part = partition_spectrum(&values, 1e-6);
    let proj = AProjector::new(&sys.a, &basis.q).unwrap();
    let errs = eigvec_errors(&phi, &part, &red.values, &red.phi_tilde, &sys.m, &proj).unwrap();
    for e in &errs {
        assert!(e.eps <= 1e-10 && e.delta <= 1e-10, "{e:?}");
    }
    let c = correlation_matrix(&phi, &red.phi_tilde, &sys.m, &part);
    for k in 0..4 {
        for m in 0..4 {
            let expect = if k == m { 1.0 } else { 0.0 };
            assert!((c.c[(k, m)].abs() - expect).abs() <= 1e-9);
        }
        // simple eigenvalues: reconstruction is C_kk φ̃_k
        let rec = c.reconstruct(k, &red.phi_tilde);
        for (i, v) in rec.iter().enumerate() {
            assert!((v - c.c[(k, k)] * red.phi_tilde[(i, k)]).abs() <= 1e-15);
        }
    }
}

#[test]
fn correlation_reconstruction_matches_the_m_projection() {
    let sys = system(problems::FICHERA_DIFFUSION_3D, 1.0 / 4.0, &[7.0]);
    let e = gen_eig_dense(&sys.a.to_dense(), &sys.m.to_dense()).unwrap();
    let phi = e.vectors.leading_columns(9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = qr_thin(&DenseMatrix::hstack(&[&phi.add(&random_block(phi.rows(), 9, &mut rng).scale(1e-3)), &random_block(phi.rows(), 4, &mut rng)])).q;
    let basis = basis_from(q);
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let part = partition_spectrum(&e.values[..9], 1e-6);
    assert_eq!(part.num_groups(), 6);
    let c = correlation_matrix(&phi, &red.phi_tilde, &sys.m, &part);
    assert!(c.c.max_abs() <= 1.0 + 1e-9);
    for k in 0..9 {
        let g = part.group_of(k).unwrap();
        let s: Vec<usize> = part.index_set(g).collect();
        let direct = m_project(&red.phi_tilde.select_columns(&s), &sys.m, &phi.select_columns(&[k])).column(0);
        let rec = c.reconstruct(k, &red.phi_tilde);
        for (x, y) in rec.iter().zip(&direct) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
    for j in 0..part.num_groups() {
        let b = c.block(j);
        let sv = gen_eig_dense(&b.t_matmul(&b), &DenseMatrix::identity(b.rows())).unwrap();
        assert!(sv.values.iter().all(|s| (s.sqrt() - 1.0).abs() < 1e-3));
    }
    assert!(c.off_group_max_abs() < 1e-2);
}

#[test]
fn group_mismatch_is_reported() {
    let (sys, phi, _, basis) = laplace_case(1.0 / 100.0, &[1.0, 5.0], 3, 2.0, 3);
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let proj = AProjector::new(&sys.a, &basis.q).unwrap();
    // pretend the FOM values 2 and 3 coincide although the reduced ones are separated
    let part = partition_spectrum(&[1.0, 2.0, 2.0], 1e-6);
    let r = eigvec_errors(&phi, &part, &red.values[..3], &red.phi_tilde, &sys.m, &proj);
    assert!(matches!(r, Err(AnalysisError::GroupMismatch { group: 1, .. })));
}

#[test]
fn laplace_bounds_hold_at_mu_ten() {
    let (sys, _, _, basis) = laplace_case(1.0 / 500.0, &[1.0, 5.0, 9.0], 5, 10.0, 1);
    let out = lobpcg(
        &sys.a,
        &sys.m,
        &SolverOptions {
            block_size: 15,
            tol: 1e-11,
            preconditioner: Preconditioner::BandedCholesky,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let report = verify_bounds(
        &sys.a,
        &sys.m,
        &out.solution,
        &basis.q,
        &red.values,
        &red.phi_tilde,
        &[10.0],
        &BoundOptions::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 15);
    assert_eq!(report.shift_t, 0.0);
    for r in &report.rows {
        assert!(r.lower_ok && r.upper_ok == Some(true) && r.vec_ok == Some(true), "{r:?}");
        assert!(r.kappa_sq_lambda >= r.lambda_tilde - 1e-8 * r.lambda_tilde);
    }
    assert!(report.all_pass());
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mu,k,lambda,lambda_tilde,kappa,kappa_sq_lambda,tau,eps,delta,lower_ok,upper_ok,vec_ok,shift_t"
    );
    assert_eq!(lines.count(), 15);
    assert_eq!(BoundReport::csv_header(2).split(',').take(3).collect::<Vec<_>>(), ["mu1", "mu2", "k"]);
}

#[test]
fn exact_reproduction_has_unit_kappa() {
    let (sys, _, _, basis) = laplace_case(1.0 / 200.0, &[4.0], 4, 4.0, 1);
    let out = lobpcg(
        &sys.a,
        &sys.m,
        &SolverOptions {
            block_size: 4,
            tol: 1e-12,
            preconditioner: Preconditioner::BandedCholesky,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let report = verify_bounds(&sys.a, &sys.m, &out.solution, &basis.q, &red.values, &red.phi_tilde, &[4.0], &BoundOptions::default()).unwrap();
    for r in &report.rows {
        assert!((r.kappa - 1.0).abs() <= 1e-8, "{r:?}");
        assert!((r.lambda_tilde - r.lambda).abs() <= 1e-8 * r.lambda);
        assert!(r.lower_ok && r.upper_ok == Some(true));
    }
    assert_eq!(report.rows.len(), 4);
}

#[test]
fn negative_spectrum_is_shifted_for_the_bounds() {
    let prob = builtin(problems::DIATOMIC_WELL_3D).unwrap();
    let mesh = build_mesh(&MeshSpec {
        domain: prob.domain.clone(),
        h: 1.0 / 6.0,
        element_order: 1,
    })
    .unwrap();
    let opts = SolverOptions {
        tol: 1e-11,
        preconditioner: Preconditioner::BandedCholesky,
        ..SolverOptions::default()
    };
    let train = vec![vec![-1.25], vec![1.25]];
    let basis = build_basis(&collect_snapshots(&prob, &mesh, &train, 2, &opts).unwrap()).unwrap();
    let sys = assemble(&prob, &mesh, &[0.5]).unwrap();
    let fom = lobpcg(&sys.a, &sys.m, &SolverOptions { block_size: 4, ..opts }).unwrap();
    let lambda1 = fom.solution.values[0];
    assert!(lambda1 < 0.0);
    let red = solve_reduced(&project_operators(&sys.a, &sys.m, &basis).unwrap(), &basis).unwrap();
    let report = verify_bounds(&sys.a, &sys.m, &fom.solution, &basis.q, &red.values, &red.phi_tilde, &[0.5], &BoundOptions::default()).unwrap();
    assert!((report.shift_t - (1.0 - lambda1)).abs() < 1e-12);
    assert_eq!(report.rows.len(), 4);
    assert!(report.all_pass(), "{:?}", report.failures());
}

#[test]
fn min_max_subspace_sampling() {
    let sys = system(problems::LAPLACE_ROBIN_1D, 1.0 / 150.0, &[2.0]);
    let (a, m) = (sys.a.to_dense(), sys.m.to_dense());
    let e = gen_eig_dense(&a, &m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 1..=3 {
        for _ in 0..100 {
            // max Rayleigh quotient over a random k-dimensional subspace
            let v = random_block(a.rows(), k, &mut rng);
            let red = gen_eig_dense(&v.t_matmul(&a.matmul(&v)), &v.t_matmul(&m.matmul(&v))).unwrap();
            assert!(red.values[k - 1] >= e.values[k - 1] * (1.0 - 1e-10));
        }
    }
}

fn pencil_case(n: usize, r: usize, seed: u64) -> (DenseMatrix, DenseMatrix, DenseMatrix, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = spd(n, 0.2, &mut rng);
    let m = spd(n, 0.5, &mut rng);
    let q = orthonormal(n, r, &mut rng);
    (a, m, q, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn projector_is_idempotent_and_galerkin(n in 5usize..40, r in 1usize..5, seed in any::<u64>()) {
        let (a, _, q, mut rng) = pencil_case(n, r, seed);
        let proj = AProjector::new(&a, &q).unwrap();
        let x = random_block(n, 3, &mut rng);
        let px = proj.apply(&x);
        let scale = px.max_abs().max(1.0);
        prop_assert!(proj.apply(&px).sub(&px).max_abs() <= 1e-10 * scale);
        let g = q.t_matmul(&a.matmul(&x.sub(&px)));
        prop_assert!(g.max_abs() <= 1e-10 * a.max_abs() * x.max_abs().max(1.0) * n as f64);
    }

    #[test]
    fn projector_is_non_expansive_in_the_a_norm(n in 5usize..40, r in 1usize..5, seed in any::<u64>()) {
        let (a, _, q, mut rng) = pencil_case(n, r, seed);
        let proj = AProjector::new(&a, &q).unwrap();
        let x = random_block(n, 1, &mut rng);
        let px = proj.apply(&x).column(0);
        prop_assert!(w_norm(&px, &a) <= w_norm(&x.column(0), &a) * (1.0 + 1e-10));
    }

    #[test]
    fn m_projection_is_the_best_approximation(n in 5usize..40, r in 1usize..5, seed in any::<u64>()) {
        let (_, m, q, mut rng) = pencil_case(n, r, seed);
        // M-orthonormalize the basis
        let l = rbeig_core::linalg::cholesky(&q.t_matmul(&m.matmul(&q))).unwrap();
        let mut phi_t = q.transpose();
        rbeig_core::linalg::solve_lower_in_place(&l, &mut phi_t);
        let phi = phi_t.transpose();
        let x = random_block(n, 1, &mut rng);
        let resid = x.sub(&m_project(&phi, &m, &x)).column(0);
        let y = phi.matmul(&random_block(r, 1, &mut rng)).column(0);
        let diff: Vec<f64> = x.column(0).iter().zip(&y).map(|(a, b)| a - b).collect();
        prop_assert!(w_norm(&resid, &m) <= w_norm(&diff, &m) * (1.0 + 1e-10));
        // M-Galerkin orthogonality
        let g = phi.t_matmul(&m.matmul(&DenseMatrix::from_columns(&[resid])));
        prop_assert!(g.max_abs() <= 1e-10 * m.max_abs().max(1.0));
    }

    #[test]
    fn kappa_bounds_the_sampled_ratio(n in 6usize..30, seed in any::<u64>()) {
        let (a, m, _, mut rng) = pencil_case(n, 1, seed);
        let e = gen_eig_dense(&a, &m).unwrap();
        let phi = e.vectors.leading_columns(2);
        let q = orthonormal(n, 4, &mut rng);
        let proj = AProjector::new(&a, &q).unwrap();
        let kappa = compute_kappa(&phi, &proj, &m);
        prop_assume!(kappa.is_finite());
        for _ in 0..50 {
            let y = phi.matmul(&random_block(2, 1, &mut rng));
            let py = proj.apply(&y).column(0);
            let ratio = w_norm(&y.column(0), &m) / w_norm(&py, &m);
            prop_assert!(kappa.value >= ratio * (1.0 - 1e-9), "{} < {}", kappa.value, ratio);
        }
    }
}
