//! Small dense random saddle systems with a prescribed condition number of `M`.

use alloc::format;
use alloc::vec::Vec;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GeneratedProblem;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix, SymmetricEigen};
use crate::system::SaddleSystem;
use crate::transforms::dense_saddle_solve;

const MAX_ATTEMPTS: u64 = 8;
/// `λ_min(A^T A) / λ_max(A^T A)` below this counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

pub fn gen_random_saddle(m: usize, n: usize, cond: f64, seed: u64) -> Result<GeneratedProblem> {
    if !(m > n && n >= 1) {
        return Err(Error::Invalid(format!(
            "random saddle needs m > n >= 1 (got m = {m}, n = {n})"
        )));
    }
    if !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "cond",
            value: cond,
            reason: "must be finite and at least 1",
        });
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let unit = Uniform::new_inclusive(-1.0, 1.0);
        let q = random_orthogonal(m, &mut rng, &unit)?;
        let spectrum: Vec<f64> = (0..m)
            .map(|i| {
                if m == 1 {
                    1.0
                } else {
                    libm::pow(cond, i as f64 / (m - 1) as f64)
                }
            })
            .collect();
        let mut md = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let mut acc = 0.0;
                for (k, d) in spectrum.iter().enumerate() {
                    acc += q[(i, k)] * d * q[(j, k)];
                }
                md[(i, j)] = acc;
                md[(j, i)] = acc;
            }
        }
        let mut ad = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                ad[(i, j)] = unit.sample(&mut rng);
            }
        }
        if !full_column_rank(&ad)? {
            continue;
        }
        let g: Vec<f64> = (0..m).map(|_| unit.sample(&mut rng)).collect();
        let r: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
        let system = SaddleSystem::new(
            SparseMatrix::from_dense(&md),
            SparseMatrix::from_dense(&ad),
            1.0,
            g,
            r,
        )?;
        let sol = dense_saddle_solve(&system, m)?;
        return Ok(GeneratedProblem {
            system,
            w_exact: Some(sol.w),
            p_exact: Some(sol.p),
            description: format!(
                "random saddle system, m = {m}, n = {n}, cond(M) = {cond:e}, seed {}",
                seed.wrapping_add(attempt)
            ),
            h: 0.0,
        });
    }
    Err(Error::RankDeficient(format!(
        "no full-rank coupling block after {MAX_ATTEMPTS} seeds starting at {seed}"
    )))
}

/// Modified Gram-Schmidt on a random square matrix, redrawing any column
/// that becomes numerically dependent.
fn random_orthogonal(m: usize, rng: &mut ChaCha8Rng, unit: &Uniform<f64>) -> Result<DenseMatrix> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut redraws = 0;
    while cols.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| unit.sample(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let proj: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm < 1e-8 {
            redraws += 1;
            if redraws > 100 {
                return Err(Error::Breakdown("random orthogonalization".into()));
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let mut q = DenseMatrix::zeros(m, m);
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            q[(i, j)] = *x;
        }
    }
    Ok(q)
}

fn full_column_rank(a: &DenseMatrix) -> Result<bool> {
    let ata = a.transpose().matmul(a)?;
    let eig = SymmetricEigen::compute(&ata)?;
    let lo = eig.values.first().copied().unwrap_or(0.0);
    let hi = eig.values.last().copied().unwrap_or(0.0);
    Ok(hi > 0.0 && lo > RANK_TOL * hi)
}
