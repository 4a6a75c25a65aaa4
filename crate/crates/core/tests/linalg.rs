mod common;

use common::*;
use gkb_core::linalg::{
    dense_cholesky_solve, spmv, spmv_t, weighted_norm, DenseMatrix, SparseMatrix, SymmetricEigen,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn sparse_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..rows, 0..cols, -10.0f64..10.0), 0..rows * cols)
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = norm(b).max(1e-300);
    norm(&diff(a, b)) / scale
}

proptest! {
    #[test]
    fn spmv_matches_dense(trip in sparse_strategy(8, 8), x in prop::collection::vec(-5.0f64..5.0, 8)) {
        let a = SparseMatrix::from_triplets(8, 8, &trip).unwrap();
        let y = spmv(&a, &x).unwrap();
        let oracle = to_na(&a) * DVector::from_column_slice(&x);
        prop_assert!(rel(&y, oracle.as_slice()) <= 1e-14 || norm(oracle.as_slice()) < 1e-12);
    }

    #[test]
    fn spmv_t_matches_transposed_dense(trip in sparse_strategy(8, 5), x in prop::collection::vec(-5.0f64..5.0, 8)) {
        let a = SparseMatrix::from_triplets(8, 5, &trip).unwrap();
        let y = spmv_t(&a, &x).unwrap();
        let oracle = to_na(&a).transpose() * DVector::from_column_slice(&x);
        prop_assert!(rel(&y, oracle.as_slice()) <= 1e-14 || norm(oracle.as_slice()) < 1e-12);
        let explicit = spmv(&a.transpose(), &x).unwrap();
        prop_assert!(rel(&y, &explicit) <= 1e-15 || norm(&explicit) < 1e-12);
    }

    #[test]
    fn weighted_norm_identity_is_euclidean(x in prop::collection::vec(-5.0f64..5.0, 1..20)) {
        let m = SparseMatrix::identity(x.len());
        let w = weighted_norm(&x, &m).unwrap();
        prop_assert!((w - norm(&x)).abs() <= 1e-14 * norm(&x).max(1.0));
    }

    #[test]
    fn weighted_norm_positive_for_spd(seed in 0u64..1000, x in prop::collection::vec(-5.0f64..5.0, 6)) {
        prop_assume!(norm(&x) > 1e-6);
        let m = from_na(&random_spd(6, seed, 0.5));
        prop_assert!(weighted_norm(&x, &m).unwrap() > 0.0);
    }

    #[test]
    fn sparse_product_matches_dense(a in sparse_strategy(6, 4), b in sparse_strategy(4, 5)) {
        let sa = SparseMatrix::from_triplets(6, 4, &a).unwrap();
        let sb = SparseMatrix::from_triplets(4, 5, &b).unwrap();
        let prod = sa.matmul(&sb, 1000).unwrap();
        let oracle = to_na(&sa) * to_na(&sb);
        prop_assert!((to_na(&prod) - oracle).amax() <= 1e-12);
    }
}

#[test]
fn weighted_norm_matches_quadratic_form() {
    let md = random_spd(6, 11, 0.1);
    let m = from_na(&md);
    let x: Vec<f64> = random_dense(6, 1, 3).iter().copied().collect();
    let v = DVector::from_column_slice(&x);
    let oracle = (v.transpose() * &md * &v)[(0, 0)].sqrt();
    assert!((weighted_norm(&x, &m).unwrap() - oracle).abs() <= 1e-13 * oracle);
}

#[test]
fn cholesky_residual_on_random_spd() {
    let md = random_spd(10, 5, 0.1);
    let b: Vec<f64> = random_dense(10, 1, 9).iter().copied().collect();
    let dense = DenseMatrix::from_row_major(10, 10, md.transpose().as_slice().to_vec()).unwrap();
    let x = dense_cholesky_solve(&dense, &b).unwrap();
    let r = &md * DVector::from_column_slice(&x) - DVector::from_column_slice(&b);
    assert!(r.norm() / norm(&b) <= 1e-12);
}

#[test]
fn symmetric_eigen_matches_nalgebra() {
    let md = random_spd(12, 21, 0.0) - DMatrix::identity(12, 12) * 2.0;
    let dense = DenseMatrix::from_row_major(12, 12, md.transpose().as_slice().to_vec()).unwrap();
    let ours = SymmetricEigen::compute(&dense).unwrap();
    let mut oracle: Vec<f64> = md.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = oracle.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for (a, b) in ours.values.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
    }
    for j in 0..12 {
        let v = DVector::from_vec(ours.vector(j));
        let res = &md * &v - &v * ours.values[j];
        assert!(res.norm() <= 1e-11 * scale);
        assert!((v.norm() - 1.0).abs() <= 1e-12);
    }
}
