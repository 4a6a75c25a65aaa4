//! Inner solvers for `M w = rhs`.
//!
//! The outer iteration only sees the [`InnerSolver`] trait: it hands over a
//! right-hand side and a relative tolerance and gets back a solution and an
//! [`InnerReport`] whose iteration count feeds the cost accounting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::linalg::vector::{all_finite, axpy_in_place, dot_unchecked};
use crate::linalg::{Cholesky, SparseMatrix};

/// Largest dimension that [`exact_solve`] densifies by default.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerReport {
    pub iterations: usize,
    /// `||rhs - M x||_2 / ||rhs||_2` evaluated with an explicit product.
    pub achieved_rel_residual: f64,
    pub converged: bool,
    /// Explicit residual evaluations made after the recursive residual
    /// signalled convergence. At least one whenever `iterations > 0`.
    pub residual_checks: usize,
}

/// Something that applies a square operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y)
    }
}

/// An approximate (or exact) application of `M^{-1}`.
pub trait InnerSolver {
    fn dim(&self) -> usize;

    /// Solves `M x = rhs` to relative residual `tol`.
    fn solve(&mut self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, InnerReport)>;
}

/// Unpreconditioned conjugate gradients on a sparse SPD matrix.
pub fn cg_solve(
    m: &SparseMatrix,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
    x0: &[f64],
) -> Result<(Vec<f64>, InnerReport)> {
    check_len("cg_solve (square matrix)", m.n_rows(), m.n_cols())?;
    cg_solve_op(m, rhs, tol, maxit, x0)
}

/// Conjugate gradients for any [`LinearOperator`].
///
/// Stops on the recursively updated residual; a converged exit is confirmed by
/// an explicit residual, and if that one misses the tolerance the iteration
/// restarts from it.
pub fn cg_solve_op<O: LinearOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
    x0: &[f64],
) -> Result<(Vec<f64>, InnerReport)> {
    let n = op.dim();
    check_len("cg_solve rhs", n, rhs.len())?;
    check_len("cg_solve x0", n, x0.len())?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "inner tolerance must lie in (0, 1)",
        });
    }
    if maxit == 0 {
        return Err(Error::InvalidParameter {
            name: "maxit",
            value: 0.0,
            reason: "at least one iteration is required",
        });
    }
    if !all_finite(rhs) {
        return Err(Error::NonFinite("cg_solve right-hand side"));
    }

    let rhs_norm = libm::sqrt(dot_unchecked(rhs, rhs));
    if rhs_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            InnerReport {
                iterations: 0,
                achieved_rel_residual: 0.0,
                converged: true,
                residual_checks: 0,
            },
        ));
    }

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut mp = vec![0.0; n];
    explicit_residual(op, rhs, &x, &mut r, &mut mp);
    let mut rr = dot_unchecked(&r, &r);
    let mut p = r.clone();
    let threshold = tol * rhs_norm;

    let mut iterations = 0;
    let mut checks = 0;
    let achieved;
    let converged;
    loop {
        if libm::sqrt(rr) <= threshold || iterations >= maxit {
            explicit_residual(op, rhs, &x, &mut r, &mut mp);
            checks += 1;
            rr = dot_unchecked(&r, &r);
            let rel = libm::sqrt(rr) / rhs_norm;
            if rel <= tol {
                achieved = rel;
                converged = true;
                break;
            }
            if iterations >= maxit {
                achieved = rel;
                converged = false;
                break;
            }
            p.copy_from_slice(&r);
        }

        op.apply(&p, &mut mp);
        iterations += 1;
        let curvature = dot_unchecked(&p, &mp);
        if !(curvature > 0.0) {
            if curvature.is_nan() {
                return Err(Error::NonFinite("cg_solve curvature"));
            }
            return Err(Error::NotPositiveDefinite {
                context: "cg curvature p^T M p",
                value: curvature,
            });
        }
        let alpha = rr / curvature;
        axpy_in_place(alpha, &p, &mut x);
        axpy_in_place(-alpha, &mp, &mut r);
        let rr_next = dot_unchecked(&r, &r);
        if !rr_next.is_finite() || !alpha.is_finite() {
            return Err(Error::NonFinite("cg_solve iterate"));
        }
        let beta = rr_next / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
    }

    Ok((
        x,
        InnerReport {
            iterations,
            achieved_rel_residual: achieved,
            converged,
            residual_checks: checks,
        },
    ))
}

fn explicit_residual<O: LinearOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    x: &[f64],
    r: &mut [f64],
    scratch: &mut [f64],
) {
    op.apply(x, scratch);
    for ((ri, bi), mi) in r.iter_mut().zip(rhs).zip(scratch.iter()) {
        *ri = bi - mi;
    }
}

/// CG as an [`InnerSolver`], always started from `x0 = 0`.
#[derive(Debug, Clone)]
pub struct CgSolver<'a> {
    matrix: &'a SparseMatrix,
    maxit: usize,
}

impl<'a> CgSolver<'a> {
    pub fn new(matrix: &'a SparseMatrix, maxit: usize) -> Self {
        Self { matrix, maxit }
    }

    /// Iteration limit of `10 * dim`.
    pub fn with_default_maxit(matrix: &'a SparseMatrix) -> Self {
        Self::new(matrix, 10 * matrix.n_rows().max(1))
    }
}

impl InnerSolver for CgSolver<'_> {
    fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    fn solve(&mut self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, InnerReport)> {
        let x0 = vec![0.0; self.matrix.n_rows()];
        cg_solve(self.matrix, rhs, tol, self.maxit, &x0)
    }
}

/// Exact inner solver backed by a dense Cholesky factorization computed once.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    factor: Cholesky,
}

impl DirectSolver {
    pub fn new(m: &SparseMatrix, cap: usize) -> Result<Self> {
        check_len("direct solver (square matrix)", m.n_rows(), m.n_cols())?;
        if m.n_rows() > cap {
            return Err(Error::Capacity {
                what: "direct inner solve",
                size: m.n_rows(),
                cap,
                hint: "use the CG inner solver instead",
            });
        }
        Ok(Self {
            factor: Cholesky::factor(&m.to_dense())?,
        })
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

impl InnerSolver for DirectSolver {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    /// The tolerance is ignored; the solve is exact up to roundoff.
    fn solve(&mut self, rhs: &[f64], _tol: f64) -> Result<(Vec<f64>, InnerReport)> {
        let x = self.factor.solve(rhs)?;
        if !all_finite(&x) {
            return Err(Error::NonFinite("direct solve"));
        }
        Ok((
            x,
            InnerReport {
                iterations: 0,
                achieved_rel_residual: 0.0,
                converged: true,
                residual_checks: 0,
            },
        ))
    }
}

/// One-shot dense solve of `M x = rhs`, capped at [`DEFAULT_DENSE_CAP`] unknowns.
pub fn exact_solve(m: &SparseMatrix, rhs: &[f64]) -> Result<(Vec<f64>, InnerReport)> {
    check_len("exact_solve rhs", m.n_rows(), rhs.len())?;
    DirectSolver::new(m, DEFAULT_DENSE_CAP)?.solve(rhs, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn identity_converges_in_one_iteration() {
        let m = SparseMatrix::identity(4);
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let (x, rep) = cg_solve(&m, &rhs, 1e-12, 10, &[0.0; 4]).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(x, rhs.to_vec());
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let m = SparseMatrix::identity(3);
        let (x, rep) = cg_solve(&m, &[0.0; 3], 1e-8, 10, &[1.0; 3]).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
    }

    #[test]
    fn three_distinct_eigenvalues_terminate_in_three_steps() {
        let diag = [1.0, 2.0, 2.0, 5.0, 1.0];
        let trip: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        let m = SparseMatrix::from_triplets(5, 5, &trip).unwrap();
        let rhs = [1.0, 1.0, -1.0, 2.0, 0.5];
        let (x, rep) = cg_solve(&m, &rhs, 1e-12, 50, &[0.0; 5]).unwrap();
        assert!(rep.iterations <= 3, "iterations = {}", rep.iterations);
        assert!(rep.achieved_rel_residual <= 1e-12);
        for i in 0..5 {
            assert!((x[i] - rhs[i] / diag[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_detected() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        let err = cg_solve(&m, &[0.0, 1.0], 1e-8, 10, &[0.0; 2]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn maxit_exhaustion_is_reported_not_raised() {
        let diag: Vec<_> = (0..10).map(|i| (i, i, 1.0 + i as f64)).collect();
        let m = SparseMatrix::from_triplets(10, 10, &diag).unwrap();
        let (_, rep) = cg_solve(&m, &[1.0; 10], 1e-12, 2, &[0.0; 10]).unwrap();
        assert_eq!(rep.iterations, 2);
        assert!(!rep.converged);
        assert!(rep.achieved_rel_residual > 1e-12);
    }

    #[test]
    fn parameter_validation() {
        let m = SparseMatrix::identity(2);
        assert!(cg_solve(&m, &[1.0, 1.0], 0.0, 5, &[0.0; 2]).is_err());
        assert!(cg_solve(&m, &[1.0, 1.0], 1.0, 5, &[0.0; 2]).is_err());
        assert!(cg_solve(&m, &[1.0, 1.0], 1e-3, 0, &[0.0; 2]).is_err());
        assert!(cg_solve(&m, &[1.0], 1e-3, 5, &[0.0; 2]).is_err());
    }

    #[test]
    fn exact_solve_cases() {
        let (x, rep) = exact_solve(&SparseMatrix::identity(2), &[1.0, 2.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);

        let m = SparseMatrix::from_dense(
            &DenseMatrix::from_row_major(2, 2, vec![4.0, 1.0, 1.0, 3.0]).unwrap(),
        );
        let (x, _) = exact_solve(&m, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn direct_solver_respects_cap() {
        let err = DirectSolver::new(&SparseMatrix::identity(5), 4).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }
}
