#![allow(dead_code)]

use gkb_core::{SaddleSystem, SparseMatrix};
use nalgebra::{DMatrix, DVector};

pub fn to_na(a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.n_rows(), a.n_cols());
    for i in 0..a.n_rows() {
        for (j, v) in a.row(i) {
            d[(i, j)] = v;
        }
    }
    d
}

/// Solves the full block system with an LU factorization.
pub fn block_solve(sys: &SaddleSystem) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (sys.primal_dim(), sys.dual_dim());
    let mut k = DMatrix::zeros(m + n, m + n);
    let md = to_na(sys.m());
    let ad = to_na(sys.a());
    k.view_mut((0, 0), (m, m)).copy_from(&md);
    k.view_mut((0, m), (m, n)).copy_from(&ad);
    k.view_mut((m, 0), (n, m)).copy_from(&ad.transpose());
    let mut rhs = DVector::zeros(m + n);
    rhs.rows_mut(0, m).copy_from_slice(sys.g());
    rhs.rows_mut(m, n).copy_from_slice(sys.r());
    let x = k.lu().solve(&rhs).expect("block system is nonsingular");
    (x.rows(0, m).iter().copied().collect(), x.rows(m, n).iter().copied().collect())
}

pub fn m_norm(x: &[f64], m: &SparseMatrix) -> f64 {
    let md = to_na(m);
    let v = DVector::from_column_slice(x);
    (v.transpose() * &md * &v)[(0, 0)].sqrt()
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    norm(&diff(a, b)) / norm(b)
}

/// Random symmetric positive definite matrix `L L^T + shift I`.
pub fn random_spd(n: usize, seed: u64, shift: f64) -> DMatrix<f64> {
    let l = random_dense(n, n, seed);
    &l * l.transpose() + DMatrix::identity(n, n) * shift
}

/// Deterministic pseudo-random matrix with entries in (-1, 1).
pub fn random_dense(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    DMatrix::from_fn(rows, cols, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    })
}

pub fn from_na(d: &DMatrix<f64>) -> SparseMatrix {
    let mut trip = Vec::new();
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            if d[(i, j)] != 0.0 {
                trip.push((i, j, d[(i, j)]));
            }
        }
    }
    SparseMatrix::from_triplets(d.nrows(), d.ncols(), &trip).unwrap()
}
