//! Transformations of a saddle system: augmented Lagrangian, dense Schur
//! complement, spectral deflation of the dual operator, and a dense direct
//! solve used as a reference at small scale.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::gkb::{gkb_run, recover_w, transform_rhs, GkbOptions, GkbState, RunLog};
use crate::inner::{InnerReport, InnerSolver};
use crate::linalg::vector::{axpy_in_place, dot_unchecked};
use crate::linalg::{Cholesky, DenseMatrix, SymmetricEigen};
use crate::relax::TolerancePolicy;
use crate::system::SaddleSystem;

/// Default bound on the primal dimension that may be densified.
pub const DEFAULT_SCHUR_CAP: usize = 5_000;

/// Default bound on the number of stored entries of `M + η A A^T`.
pub const DEFAULT_NNZ_CAP: usize = 50_000_000;

/// Augmented Lagrangian form: `M' = M + η A A^T`, `g' = g + η A r`, with the
/// dual weight set to `N = (1/η) I`. The solution `(w, p)` is unchanged.
pub fn augment(system: &SaddleSystem, eta_new: f64, nnz_cap: usize) -> Result<SaddleSystem> {
    if !(eta_new > 0.0 && eta_new.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta_new,
            reason: "must be positive and finite",
        });
    }
    let a = system.a();
    let aat = a.matmul(&a.transpose(), nnz_cap)?;
    let m_aug = system.m().add_scaled(eta_new, &aat)?;
    if m_aug.nnz() > nnz_cap {
        return Err(Error::Capacity {
            what: "augmented matrix",
            size: m_aug.nnz(),
            cap: nnz_cap,
            hint: "raise the nnz cap or use a smaller problem",
        });
    }
    let mut ar = vec![0.0; system.primal_dim()];
    a.mul_vec_into(system.r(), &mut ar);
    let mut g = system.g().to_vec();
    axpy_in_place(eta_new, &ar, &mut g);
    SaddleSystem::new(m_aug, a.clone(), eta_new, g, system.r().to_vec())
}

fn check_dense_cap(system: &SaddleSystem, cap: usize, what: &'static str) -> Result<()> {
    if system.primal_dim() > cap {
        return Err(Error::Capacity {
            what,
            size: system.primal_dim(),
            cap,
            hint: "dense operations are meant for small problems",
        });
    }
    Ok(())
}

/// `X = M^{-1} A` as a dense `m x n` matrix, one Cholesky solve per column.
pub fn dense_minv_a(system: &SaddleSystem, cap: usize, what: &'static str) -> Result<DenseMatrix> {
    check_dense_cap(system, cap, what)?;
    let chol = Cholesky::factor(&system.m().to_dense())?;
    minv_a_with(system, &chol)
}

fn minv_a_with(system: &SaddleSystem, chol: &Cholesky) -> Result<DenseMatrix> {
    let (m, n) = (system.primal_dim(), system.dual_dim());
    let at = system.a().transpose();
    let mut x = DenseMatrix::zeros(m, n);
    let mut col = vec![0.0; m];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        for (i, v) in at.row(j) {
            col[i] = v;
        }
        let sol = chol.solve(&col)?;
        for (i, s) in sol.into_iter().enumerate() {
            x[(i, j)] = s;
        }
    }
    Ok(x)
}

/// `S = A^T X` for `X = M^{-1} A`, symmetrized as `(S + S^T) / 2`.
pub fn schur_from_minv_a(system: &SaddleSystem, x: &DenseMatrix) -> Result<DenseMatrix> {
    check_len("schur: X rows", system.primal_dim(), x.n_rows())?;
    check_len("schur: X cols", system.dual_dim(), x.n_cols())?;
    let n = system.dual_dim();
    let mut s = DenseMatrix::zeros(n, n);
    let a = system.a();
    for k in 0..system.primal_dim() {
        let xk = x.row(k);
        for (j, a_kj) in a.row(k) {
            axpy_in_place(a_kj, xk, s.row_mut(j));
        }
    }
    s.symmetrize();
    Ok(s)
}

/// Dense Schur complement `S = A^T M^{-1} A`.
pub fn schur_dense(system: &SaddleSystem, cap: usize) -> Result<DenseMatrix> {
    let x = dense_minv_a(system, cap, "dense schur complement")?;
    schur_from_minv_a(system, &x)
}

/// Reference solution of the block system through the Schur complement.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub w: Vec<f64>,
    pub p: Vec<f64>,
}

/// Direct solve: `S p = A^T M^{-1} g - r`, then `w = M^{-1}(g - A p)`.
pub fn dense_saddle_solve(system: &SaddleSystem, cap: usize) -> Result<DenseSolution> {
    check_dense_cap(system, cap, "dense saddle solve")?;
    let chol_m = Cholesky::factor(&system.m().to_dense())?;
    let x = minv_a_with(system, &chol_m)?;
    let s = schur_from_minv_a(system, &x)?;
    let chol_s = Cholesky::factor(&s).map_err(|_| {
        Error::RankDeficient(alloc::string::String::from(
            "the Schur complement is not positive definite; A lacks full column rank",
        ))
    })?;
    let minv_g = chol_m.solve(system.g())?;
    let mut rhs = vec![0.0; system.dual_dim()];
    system.a().mul_vec_t_into(&minv_g, &mut rhs);
    for (ri, r) in rhs.iter_mut().zip(system.r()) {
        *ri -= r;
    }
    let p = chol_s.solve(&rhs)?;
    let mut ap = vec![0.0; system.primal_dim()];
    system.a().mul_vec_into(&p, &mut ap);
    let rhs_w: Vec<f64> = system.g().iter().zip(&ap).map(|(g, a)| g - a).collect();
    let w = chol_m.solve(&rhs_w)?;
    Ok(DenseSolution { w, p })
}

/// Smallest eigenpairs of `η S`. The vectors are Euclidean-orthonormal, so
/// `sqrt(η) ê_i` are the `N`-orthonormal eigenvectors of `S v = λ N v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflationBasis {
    /// Ascending and positive.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub eta: f64,
}

impl DeflationBasis {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Removes the components of `x` along the basis vectors.
    pub fn project_out(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for e in &self.vectors {
            let c = dot_unchecked(e, &out);
            axpy_in_place(-c, e, &mut out);
        }
        out
    }
}

/// Computes the `k_defl` smallest eigenpairs of `η S` and returns them with
/// the projected right-hand side `b_defl = b - Σ ê_i (ê_i^T b)`.
pub fn deflate(
    system: &SaddleSystem,
    b: &[f64],
    k_defl: usize,
    cap: usize,
) -> Result<(DeflationBasis, Vec<f64>)> {
    check_len("deflate: b length", system.dual_dim(), b.len())?;
    if k_defl >= system.dual_dim() {
        return Err(Error::InvalidParameter {
            name: "k_defl",
            value: k_defl as f64,
            reason: "must be smaller than the dual dimension",
        });
    }
    let eta = system.eta();
    if k_defl == 0 {
        let basis = DeflationBasis {
            values: Vec::new(),
            vectors: Vec::new(),
            eta,
        };
        return Ok((basis, b.to_vec()));
    }
    let s = schur_dense(system, cap)?;
    let eig = SymmetricEigen::compute(&s)?;
    let mut values = Vec::with_capacity(k_defl);
    let mut vectors = Vec::with_capacity(k_defl);
    for j in 0..k_defl {
        let lambda = eta * eig.values[j];
        if !(lambda > 0.0) {
            return Err(Error::RankDeficient(alloc::format!(
                "Schur complement eigenvalue {j} is {lambda:e}"
            )));
        }
        values.push(lambda);
        vectors.push(eig.vector(j));
    }
    let basis = DeflationBasis { values, vectors, eta };
    let b_defl = basis.project_out(b);
    Ok((basis, b_defl))
}

/// Solution of `-S p = b` on the deflated subspace and the matching primal
/// part: `p_corr = -η Σ ê_i (ê_i^T b) / λ_i`, `u_corr = -M^{-1} A p_corr`.
pub fn deflation_correction<S: InnerSolver + ?Sized>(
    basis: &DeflationBasis,
    b: &[f64],
    system: &SaddleSystem,
    inner: &mut S,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>, InnerReport)> {
    check_len("deflation correction: b length", system.dual_dim(), b.len())?;
    let mut p_corr = vec![0.0; system.dual_dim()];
    for (lambda, e) in basis.values.iter().zip(&basis.vectors) {
        if !(*lambda > 0.0) {
            return Err(Error::RankDeficient(alloc::format!(
                "deflated eigenvalue {lambda:e} is not positive"
            )));
        }
        check_len("deflation correction: eigenvector length", b.len(), e.len())?;
        let c = -basis.eta * dot_unchecked(e, b) / lambda;
        axpy_in_place(c, e, &mut p_corr);
    }
    if p_corr.iter().all(|&v| v == 0.0) {
        let report = InnerReport {
            iterations: 0,
            achieved_rel_residual: 0.0,
            converged: true,
            residual_checks: 0,
        };
        return Ok((vec![0.0; system.primal_dim()], p_corr, report));
    }
    let mut ap = vec![0.0; system.primal_dim()];
    system.a().mul_vec_into(&p_corr, &mut ap);
    let (minv_ap, report) = inner.solve(&ap, tau)?;
    let u_corr = minv_ap.into_iter().map(|v| -v).collect();
    Ok((u_corr, p_corr, report))
}

#[derive(Debug, Clone)]
pub struct DeflatedSolution {
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub basis: DeflationBasis,
    pub b: Vec<f64>,
    pub b_defl: Vec<f64>,
    /// Bidiagonalization state of the run on `b_defl`.
    pub state: GkbState,
    /// Log of the run on `b_defl`; `cum_inner` includes the transform and
    /// correction solves.
    pub log: RunLog,
}

/// Transform, deflate, run GKB on the projected right-hand side, then add the
/// coarse correction.
pub fn deflated_solve<S, P>(
    system: &SaddleSystem,
    k_defl: usize,
    cap: usize,
    options: &GkbOptions,
    policy: &mut P,
    inner: &mut S,
) -> Result<DeflatedSolution>
where
    S: InnerSolver + ?Sized,
    P: TolerancePolicy + ?Sized,
{
    options.validate()?;
    let (b, shift, setup) = transform_rhs(system, inner, options.tau)?;
    let (basis, b_defl) = deflate(system, &b, k_defl, cap)?;
    let (state, mut log) = gkb_run(
        system,
        &b_defl,
        options,
        policy,
        inner,
        None,
        setup.iterations,
    )?;
    let (u_corr, p_corr, corr) = deflation_correction(&basis, &b, system, inner, options.tau)?;
    // charged to the last record so that the records still sum to cum_inner
    log.cum_inner += corr.iterations;
    if let Some(last) = log.records.last_mut() {
        last.inner_iterations += corr.iterations;
    }
    let u = crate::linalg::axpy(1.0, &state.u, &u_corr)?;
    let p = crate::linalg::axpy(1.0, &state.p, &p_corr)?;
    let w = recover_w(&u, &shift)?;
    Ok(DeflatedSolution {
        w,
        p,
        basis,
        b,
        b_defl,
        state,
        log,
    })
}
