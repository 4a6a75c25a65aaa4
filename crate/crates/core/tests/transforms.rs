mod common;

use common::*;
use gkb_core::gkb::{dual_residual, gkb_init, gkb_step, transform_rhs, StepOutcome};
use gkb_core::problems::{gen_mac_stokes_channel, gen_mixed_poisson_rt0, gen_random_saddle};
use gkb_core::transforms::{
    augment, deflate, deflated_solve, dense_saddle_solve, schur_dense, DEFAULT_NNZ_CAP,
};
use gkb_core::{gkb_solve, DirectSolver, GkbOptions, RelaxPolicy, SaddleSystem};

#[test]
fn augmentation_preserves_the_solution() {
    for seed in 0..4 {
        let sys = gen_random_saddle(10, 4, 1e3, seed).unwrap().system;
        let (w0, p0) = block_solve(&sys);
        for eta in [0.5, 10.0, 1000.0] {
            let aug = augment(&sys, eta, DEFAULT_NNZ_CAP).unwrap();
            let (w1, p1) = block_solve(&aug);
            assert!(rel_diff(&w1, &w0) <= 1e-8, "seed {seed}, eta {eta}");
            assert!(rel_diff(&p1, &p0) <= 1e-8, "seed {seed}, eta {eta}");
        }
    }
}

#[test]
fn augmentation_with_zero_data_keeps_zero_upper_rhs() {
    let base = gen_random_saddle(10, 4, 10.0, 1).unwrap().system;
    let sys = SaddleSystem::new(base.m().clone(), base.a().clone(), 1.0, vec![0.0; 10], vec![0.0; 4])
        .unwrap();
    let aug = augment(&sys, 3.0, DEFAULT_NNZ_CAP).unwrap();
    assert!(aug.g().iter().all(|&v| v == 0.0));
}

#[test]
fn dense_solve_matches_lu_oracle() {
    let sys = gen_random_saddle(15, 6, 1e3, 9).unwrap().system;
    let ours = dense_saddle_solve(&sys, 100).unwrap();
    let (w, p) = block_solve(&sys);
    assert!(rel_diff(&ours.w, &w) <= 1e-10);
    assert!(rel_diff(&ours.p, &p) <= 1e-10);
}

#[test]
fn schur_complement_is_spd_and_symmetric() {
    let sys = gen_mixed_poisson_rt0(8, 1).unwrap().system;
    let s = schur_dense(&sys, 5000).unwrap();
    let n = s.n_rows();
    let mut sn = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sn[(i, j)] = s[(i, j)];
        }
    }
    assert!((&sn - sn.transpose()).amax() <= 1e-11 * sn.amax());
    let eig = sn.clone().symmetric_eigen();
    assert!(eig.eigenvalues.min() > 0.0);
    // compare with A^T M^{-1} A assembled by nalgebra
    let md = to_na(sys.m());
    let ad = to_na(sys.a());
    let oracle = ad.transpose() * md.cholesky().unwrap().solve(&ad);
    assert!((&sn - oracle).amax() <= 1e-12 * sn.amax());
}

#[test]
fn deflated_residual_stays_orthogonal_to_deflated_directions() {
    let sys = gen_mixed_poisson_rt0(8, 5).unwrap().system;
    let mut inner = DirectSolver::new(sys.m(), 5000).unwrap();
    let (b, _, _) = transform_rhs(&sys, &mut inner, 1e-14).unwrap();
    let (basis, b_defl) = deflate(&sys, &b, 5, 5000).unwrap();
    for pair in basis.values.windows(2) {
        assert!(pair[0] <= pair[1]);
    }
    for (i, ei) in basis.vectors.iter().enumerate() {
        for (j, ej) in basis.vectors.iter().enumerate() {
            let d: f64 = ei.iter().zip(ej).map(|(a, b)| a * b).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((d - expect).abs() <= 1e-10);
        }
    }
    let mut state = gkb_init(&sys, &b_defl, &mut inner, 1e-14, false).unwrap();
    for _ in 0..40 {
        let mut r = vec![0.0; sys.dual_dim()];
        sys.a().mul_vec_t_into(&state.u, &mut r);
        let r: Vec<f64> = b_defl.iter().zip(&r).map(|(b, a)| b - a).collect();
        for e in &basis.vectors {
            let c: f64 = e.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / basis.eta.sqrt();
            assert!(c.abs() <= 1e-8 * norm(&b), "k = {}: {c:e}", state.k);
        }
        if gkb_step(&mut state, &sys, &mut inner, 1e-14).unwrap() == StepOutcome::LuckyBreakdown {
            break;
        }
    }
    assert!(dual_residual(sys.a(), &b_defl, &state.u).unwrap() < norm(&b_defl));
}

fn opts() -> GkbOptions {
    GkbOptions { outer_tol: 1e-7, tau: 1e-10, delay: 3, ..Default::default() }
}

#[test]
fn deflation_shortens_mixed_poisson_runs_and_stays_exact() {
    let sys = gen_mixed_poisson_rt0(16, 1).unwrap().system;
    let (w_star, p_star) = block_solve(&sys);
    let mut inner = DirectSolver::new(sys.m(), 5000).unwrap();
    let plain = gkb_solve(&sys, &opts(), &mut RelaxPolicy::constant(1e-10), &mut inner).unwrap();
    let defl =
        deflated_solve(&sys, 5, 5000, &opts(), &mut RelaxPolicy::constant(1e-10), &mut inner).unwrap();
    assert!(defl.log.status.is_converged());
    assert!(
        defl.log.outer_iterations() < plain.log.outer_iterations(),
        "{} vs {}",
        defl.log.outer_iterations(),
        plain.log.outer_iterations()
    );
    assert!(rel_diff(&defl.w, &w_star) <= 1e-7);
    assert!(rel_diff(&defl.p, &p_star) <= 1e-7);
}

#[test]
fn deflation_removes_the_channel_plateau() {
    let sys = gen_mac_stokes_channel(24, 8, 5.0).unwrap().system;
    let (w_star, p_star) = block_solve(&sys);
    let mut inner = DirectSolver::new(sys.m(), 5000).unwrap();
    let plain = gkb_solve(&sys, &opts(), &mut RelaxPolicy::constant(1e-10), &mut inner).unwrap();
    let defl =
        deflated_solve(&sys, 5, 5000, &opts(), &mut RelaxPolicy::constant(1e-10), &mut inner).unwrap();
    assert!(defl.log.outer_iterations() < plain.log.outer_iterations());
    assert!(rel_diff(&defl.w, &w_star) <= 1e-7);
    assert!(rel_diff(&defl.p, &p_star) <= 1e-7);
}

#[test]
fn augmentation_does_not_slow_down_gkb() {
    let sys = gen_mixed_poisson_rt0(16, 1).unwrap().system;
    let mut last = usize::MAX;
    for eta in [1.0, 100.0, 1000.0] {
        let aug = augment(&sys, eta, DEFAULT_NNZ_CAP).unwrap();
        let mut inner = DirectSolver::new(aug.m(), 5000).unwrap();
        let sol = gkb_solve(&aug, &opts(), &mut RelaxPolicy::constant(1e-10), &mut inner).unwrap();
        assert!(sol.log.status.is_converged());
        let k = sol.log.outer_iterations();
        assert!(k <= last, "eta {eta}: {k} > {last}");
        last = k;
    }
}
