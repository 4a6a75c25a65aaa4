//! Generalized Golub-Kahan bidiagonalization for
//!
//! ```text
//! [ M   A ] [u]   [0]
//! [ A^T 0 ] [p] = [b]
//! ```
//!
//! with `N = (1/eta) I`. Each outer step needs one application of `M^{-1}`,
//! delegated to an [`InnerSolver`] at a tolerance picked by a
//! [`TolerancePolicy`]. The iterates are built by short recurrences:
//! `u_k = u_{k-1} + ζ_k v_k` and `p_k = p_{k-1} - ζ_k d_k`. The outer loop
//! stops on the delayed relative lower bound
//! `ξ̄_{k,d} = sqrt(Σ_{i=k-d+1..k} ζ_i² / Σ_{i=1..k} ζ_i²)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::inner::{InnerReport, InnerSolver};
use crate::linalg::vector::{all_finite, axpy_in_place, dot_unchecked};
use crate::linalg::{weighted_norm, SparseMatrix};
use crate::relax::{PolicyInputs, TolerancePolicy, DEFAULT_CAP};
use crate::system::SaddleSystem;

/// `β_{k+1} <= LUCKY_BREAKDOWN * β_1` counts as an exact invariant subspace.
pub const LUCKY_BREAKDOWN: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct GkbOptions {
    /// Target for the relative lower bound `ξ̄_{k,d}`.
    pub outer_tol: f64,
    pub delay: usize,
    /// Outer iteration limit; `None` means `10 * n`.
    pub maxit: Option<usize>,
    /// Tolerance of the `M^{-1} g` solve in the right-hand side transform.
    pub tau: f64,
    /// Upper bound applied to every inner tolerance.
    pub tol_cap: f64,
    /// Keep every `v_k` and `q_k` in [`GkbState::basis`].
    pub record_basis: bool,
    /// Evaluate `||b - A^T u_k||_2` every step even if the policy ignores it.
    pub track_residual: bool,
}

impl Default for GkbOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-7,
            delay: 3,
            maxit: None,
            tau: 1e-8,
            tol_cap: DEFAULT_CAP,
            record_basis: false,
            track_residual: false,
        }
    }
}

impl GkbOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0 && self.outer_tol < 1.0) {
            return Err(Error::InvalidParameter {
                name: "outer_tol",
                value: self.outer_tol,
                reason: "must lie in (0, 1)",
            });
        }
        if self.delay == 0 {
            return Err(Error::InvalidParameter {
                name: "delay",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.tol_cap > 0.0 && self.tol_cap <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "tol_cap",
                value: self.tol_cap,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: self.tau,
                reason: "must lie in (0, 1)",
            });
        }
        if self.maxit == Some(0) {
            return Err(Error::InvalidParameter {
                name: "maxit",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    pub fn effective_maxit(&self, dual_dim: usize) -> usize {
        self.maxit.unwrap_or(10 * dual_dim.max(1))
    }
}

/// Stored bidiagonalization bases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Basis {
    pub v: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

/// Everything the recurrences carry from one step to the next.
///
/// `alpha`, `zeta` hold `α_1..α_k`, `ζ_1..ζ_k` (ζ signed). `beta` holds
/// `β_1..β_k`, plus `β_{k+1}` when the last step ended in a lucky breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct GkbState {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// `M v_k`, reused by the next step.
    mv: Vec<f64>,
    pub cum_inner: usize,
    pub tol_history: Vec<f64>,
    pub inner_history: Vec<InnerReport>,
    pub basis: Option<Basis>,
}

impl GkbState {
    pub fn zeta_abs(&self) -> Vec<f64> {
        self.zeta.iter().map(|z| z.abs()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    /// `β_{k+1}` vanished: the current iterate already solves the system.
    LuckyBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    BreakdownConverged,
}

impl SolveStatus {
    pub fn is_converged(self) -> bool {
        !matches!(self, SolveStatus::MaxIterations)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "maxit",
            SolveStatus::BreakdownConverged => "breakdown-converged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Inner iterations spent producing `ζ_k` (for `k = 1` this includes the
    /// right-hand side transform).
    pub inner_iterations: usize,
    pub inner_tol_used: f64,
    /// `ξ̄_{k,d}`; 1 while `k <= d`.
    pub lower_bound: f64,
    pub zeta_abs: f64,
    pub dual_residual: Option<f64>,
    pub true_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<IterationRecord>,
    pub cum_inner: usize,
    pub status: SolveStatus,
    pub final_lower_bound: f64,
}

impl RunLog {
    pub fn outer_iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn tolerances(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.inner_tol_used)
    }
}

/// Optional measurements taken during a solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct Diagnostics<'a> {
    /// Exact primal solution `w*` of the original system; enables
    /// [`IterationRecord::true_error`] as `||u_k + shift - w*||_M`.
    pub reference_w: Option<&'a [f64]>,
}

#[derive(Debug, Clone)]
pub struct GkbSolution {
    /// Primal iterate of the transformed system.
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// Primal solution of the original system, `u + M^{-1} g`.
    pub w: Vec<f64>,
    pub shift: Vec<f64>,
    pub b: Vec<f64>,
    pub log: RunLog,
    pub state: GkbState,
}

/// Moves the upper right-hand side into the lower block:
/// `shift = M^{-1} g` (inner tolerance `tau`) and `b = r - A^T shift`.
pub fn transform_rhs<S: InnerSolver + ?Sized>(
    system: &SaddleSystem,
    inner: &mut S,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>, InnerReport)> {
    check_len("transform_rhs: inner solver size", system.primal_dim(), inner.dim())?;
    let (shift, report) = if system.g().iter().all(|&v| v == 0.0) {
        (
            vec![0.0; system.primal_dim()],
            InnerReport {
                iterations: 0,
                achieved_rel_residual: 0.0,
                converged: true,
                residual_checks: 0,
            },
        )
    } else {
        inner.solve(system.g(), tau)?
    };
    let mut at_shift = vec![0.0; system.dual_dim()];
    system.a().mul_vec_t_into(&shift, &mut at_shift);
    let b = system
        .r()
        .iter()
        .zip(&at_shift)
        .map(|(r, s)| r - s)
        .collect();
    Ok((b, shift, report))
}

/// First bidiagonalization step.
pub fn gkb_init<S: InnerSolver + ?Sized>(
    system: &SaddleSystem,
    b: &[f64],
    inner: &mut S,
    inner_tol: f64,
    record_basis: bool,
) -> Result<GkbState> {
    check_len("gkb_init: b length", system.dual_dim(), b.len())?;
    check_len("gkb_init: inner solver size", system.primal_dim(), inner.dim())?;
    let eta = system.eta();
    let (m, a) = (system.m(), system.a());
    let b_norm2 = dot_unchecked(b, b);
    if b_norm2 == 0.0 {
        return Err(Error::TrivialRhs);
    }
    let beta1 = libm::sqrt(eta * b_norm2);
    let q: Vec<f64> = b.iter().map(|bi| eta * bi / beta1).collect();

    let mut aq = vec![0.0; system.primal_dim()];
    a.mul_vec_into(&q, &mut aq);
    let (w, report) = inner.solve(&aq, inner_tol)?;
    let (alpha1, v, mv) = normalize_energy(m, w, 1)?;

    let zeta1 = beta1 / alpha1;
    let d: Vec<f64> = q.iter().map(|qi| qi / alpha1).collect();
    let u: Vec<f64> = v.iter().map(|vi| zeta1 * vi).collect();
    let p: Vec<f64> = d.iter().map(|di| -zeta1 * di).collect();
    let basis = record_basis.then(|| Basis {
        v: vec![v.clone()],
        q: vec![q.clone()],
    });
    Ok(GkbState {
        k: 1,
        alpha: vec![alpha1],
        beta: vec![beta1],
        zeta: vec![zeta1],
        v,
        q,
        d,
        u,
        p,
        mv,
        cum_inner: report.iterations,
        tol_history: vec![inner_tol],
        inner_history: vec![report],
        basis,
    })
}

/// One outer step `k -> k + 1`.
pub fn gkb_step<S: InnerSolver + ?Sized>(
    state: &mut GkbState,
    system: &SaddleSystem,
    inner: &mut S,
    inner_tol: f64,
) -> Result<StepOutcome> {
    let eta = system.eta();
    let (m, a) = (system.m(), system.a());
    let k = state.k;
    let alpha_k = *state.alpha.last().expect("initialized state");

    // g = η A^T v_k - α_k q_k,  β_{k+1} = ||g||_N = ||g||_2 / sqrt(η)
    let mut g = vec![0.0; system.dual_dim()];
    a.mul_vec_t_into(&state.v, &mut g);
    for (gi, qi) in g.iter_mut().zip(&state.q) {
        *gi = eta * *gi - alpha_k * qi;
    }
    let beta_next = libm::sqrt(dot_unchecked(&g, &g) / eta);
    if !beta_next.is_finite() {
        return Err(Error::NonFinite("gkb_step beta"));
    }
    if beta_next <= LUCKY_BREAKDOWN * state.beta[0] {
        state.beta.push(beta_next);
        return Ok(StepOutcome::LuckyBreakdown);
    }
    let q_next: Vec<f64> = g.iter().map(|gi| gi / beta_next).collect();

    // w = M^{-1}(A q_{k+1} - β_{k+1} M v_k)
    let mut rhs = vec![0.0; system.primal_dim()];
    a.mul_vec_into(&q_next, &mut rhs);
    axpy_in_place(-beta_next, &state.mv, &mut rhs);
    let (w, report) = inner.solve(&rhs, inner_tol)?;
    let (alpha_next, v_next, mv_next) = normalize_energy(m, w, k + 1)?;

    let zeta_next = -(beta_next / alpha_next) * state.zeta[k - 1];
    for (di, qi) in state.d.iter_mut().zip(&q_next) {
        *di = (qi - beta_next * *di) / alpha_next;
    }
    axpy_in_place(zeta_next, &v_next, &mut state.u);
    axpy_in_place(-zeta_next, &state.d, &mut state.p);
    if !all_finite(&state.u) || !all_finite(&state.p) {
        return Err(Error::NonFinite("gkb_step iterates"));
    }

    if let Some(basis) = state.basis.as_mut() {
        basis.v.push(v_next.clone());
        basis.q.push(q_next.clone());
    }
    state.k = k + 1;
    state.alpha.push(alpha_next);
    state.beta.push(beta_next);
    state.zeta.push(zeta_next);
    state.v = v_next;
    state.q = q_next;
    state.mv = mv_next;
    state.cum_inner += report.iterations;
    state.tol_history.push(inner_tol);
    state.inner_history.push(report);
    Ok(StepOutcome::Advanced)
}

/// Returns `(||w||_M, w / ||w||_M, M w / ||w||_M)`, with the norm taken from
/// the explicit quadratic form.
fn normalize_energy(m: &SparseMatrix, w: Vec<f64>, k: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let mut mw = vec![0.0; w.len()];
    m.mul_vec_into(&w, &mut mw);
    let quad = dot_unchecked(&w, &mw);
    if quad < 0.0 {
        return Err(Error::Indefinite { value: quad });
    }
    let alpha = libm::sqrt(quad);
    if !alpha.is_finite() {
        return Err(Error::NonFinite("energy norm of the inner solution"));
    }
    if alpha == 0.0 {
        return Err(Error::Breakdown(format!(
            "alpha_{k} = 0: A q_{k} lies in the kernel of the inner solve"
        )));
    }
    let v = w.iter().map(|x| x / alpha).collect();
    let mv = mw.iter().map(|x| x / alpha).collect();
    Ok((alpha, v, mv))
}

/// Delayed relative lower bound `ξ̄_{k,d}` over `zeta[..k]`; `None` if `k < d`.
pub fn lower_bound_rel(zeta: &[f64], k: usize, d: usize) -> Option<f64> {
    if k < d || k > zeta.len() || k == 0 {
        return None;
    }
    let total: f64 = zeta[..k].iter().map(|z| z * z).sum();
    let window: f64 = zeta[k - d..k].iter().map(|z| z * z).sum();
    if total == 0.0 {
        return Some(0.0);
    }
    Some(libm::sqrt(window / total))
}

/// Absolute lower bound `ξ_{k,d} = sqrt(Σ_{i=k+1..k+d+1} ζ_i²)` on
/// `||u_k - u*||_M`; needs `ζ` up to index `k + d + 1`.
pub fn lower_bound_abs(zeta: &[f64], k: usize, d: usize) -> Option<f64> {
    if zeta.len() < k + d + 1 {
        return None;
    }
    Some(libm::sqrt(zeta[k..k + d + 1].iter().map(|z| z * z).sum()))
}

/// `||b - A^T u||_2`.
pub fn dual_residual(a: &SparseMatrix, b: &[f64], u: &[f64]) -> Result<f64> {
    check_len("dual_residual: u length", a.n_rows(), u.len())?;
    check_len("dual_residual: b length", a.n_cols(), b.len())?;
    let mut atu = vec![0.0; a.n_cols()];
    a.mul_vec_t_into(u, &mut atu);
    let mut acc = 0.0;
    for (bi, ai) in b.iter().zip(&atu) {
        let r = bi - ai;
        acc += r * r;
    }
    Ok(libm::sqrt(acc))
}

/// `w = u + shift`.
pub fn recover_w(u: &[f64], shift: &[f64]) -> Result<Vec<f64>> {
    crate::linalg::vector::axpy(1.0, u, shift)
}

/// `||u - u_star||_M`.
pub fn true_error_m(u: &[f64], u_star: &[f64], m: &SparseMatrix) -> Result<f64> {
    let e = crate::linalg::sub(u, u_star)?;
    weighted_norm(&e, m)
}

/// Full solve of the original system: right-hand side transform, then
/// [`gkb_run`].
pub fn gkb_solve<S, P>(
    system: &SaddleSystem,
    options: &GkbOptions,
    policy: &mut P,
    inner: &mut S,
) -> Result<GkbSolution>
where
    S: InnerSolver + ?Sized,
    P: TolerancePolicy + ?Sized,
{
    gkb_solve_with(system, options, policy, inner, Diagnostics::default())
}

/// [`gkb_solve`] with diagnostics.
pub fn gkb_solve_with<S, P>(
    system: &SaddleSystem,
    options: &GkbOptions,
    policy: &mut P,
    inner: &mut S,
    diagnostics: Diagnostics<'_>,
) -> Result<GkbSolution>
where
    S: InnerSolver + ?Sized,
    P: TolerancePolicy + ?Sized,
{
    options.validate()?;
    let (b, shift, setup) = transform_rhs(system, inner, options.tau)?;
    let reference_u = match diagnostics.reference_w {
        Some(w_star) => Some(crate::linalg::sub(w_star, &shift)?),
        None => None,
    };
    let (state, log) = gkb_run(
        system,
        &b,
        options,
        policy,
        inner,
        reference_u.as_deref(),
        setup.iterations,
    )?;
    let w = recover_w(&state.u, &shift)?;
    Ok(GkbSolution {
        u: state.u.clone(),
        p: state.p.clone(),
        w,
        shift,
        b,
        log,
        state,
    })
}

/// The outer loop on an already transformed right-hand side `b`.
///
/// `reference_u`, the exact solution of the transformed system, turns on
/// [`IterationRecord::true_error`]. `setup_inner` inner iterations (spent before the loop) are charged to the
/// first record so that `cum_inner` equals the sum over records.
pub fn gkb_run<S, P>(
    system: &SaddleSystem,
    b: &[f64],
    options: &GkbOptions,
    policy: &mut P,
    inner: &mut S,
    reference_u: Option<&[f64]>,
    setup_inner: usize,
) -> Result<(GkbState, RunLog)>
where
    S: InnerSolver + ?Sized,
    P: TolerancePolicy + ?Sized,
{
    options.validate()?;
    if let Some(reference) = reference_u {
        check_len("gkb_run: reference length", system.primal_dim(), reference.len())?;
    }
    let maxit = options.effective_maxit(system.dual_dim());
    let needs_residual = policy.needs_residual();
    let track_residual = needs_residual || options.track_residual;
    let cap = options.tol_cap;
    let a = system.a();

    let initial_residual = needs_residual.then(|| crate::linalg::norm2(b));
    let tol1 = policy
        .next_tolerance(&PolicyInputs {
            k: 1,
            zeta_hist: &[],
            residual_norm: initial_residual,
        })
        .min(cap);
    let mut state = gkb_init(system, b, inner, tol1, options.record_basis)?;
    state.cum_inner += setup_inner;

    let measure = |state: &GkbState| -> Result<(Option<f64>, Option<f64>)> {
        let res = if track_residual {
            Some(dual_residual(a, b, &state.u)?)
        } else {
            None
        };
        let err = match reference_u {
            Some(reference) => Some(true_error_m(&state.u, reference, system.m())?),
            None => None,
        };
        Ok((res, err))
    };

    let mut records = Vec::new();
    let (res, err) = measure(&state)?;
    records.push(IterationRecord {
        k: 1,
        inner_iterations: state.inner_history[0].iterations + setup_inner,
        inner_tol_used: tol1,
        lower_bound: 1.0,
        zeta_abs: state.zeta[0].abs(),
        dual_residual: res,
        true_error: err,
    });
    let mut last_residual = res;
    let mut xi_bar = 1.0;
    let mut status = SolveStatus::MaxIterations;

    while xi_bar > options.outer_tol && state.k < maxit {
        let hist = state.zeta_abs();
        let tol = policy
            .next_tolerance(&PolicyInputs {
                k: state.k + 1,
                zeta_hist: &hist,
                residual_norm: if needs_residual { last_residual } else { None },
            })
            .min(cap);
        match gkb_step(&mut state, system, inner, tol)? {
            StepOutcome::LuckyBreakdown => {
                status = SolveStatus::BreakdownConverged;
                break;
            }
            StepOutcome::Advanced => {}
        }
        let k = state.k;
        if k > options.delay {
            xi_bar = lower_bound_rel(&state.zeta, k, options.delay).unwrap_or(1.0);
        }
        let (res, err) = measure(&state)?;
        last_residual = res;
        records.push(IterationRecord {
            k,
            inner_iterations: state.inner_history[k - 1].iterations,
            inner_tol_used: tol,
            lower_bound: xi_bar,
            zeta_abs: state.zeta[k - 1].abs(),
            dual_residual: res,
            true_error: err,
        });
    }
    if status != SolveStatus::BreakdownConverged && xi_bar <= options.outer_tol {
        status = SolveStatus::Converged;
    }
    let log = RunLog {
        cum_inner: state.cum_inner,
        records,
        status,
        final_lower_bound: xi_bar,
    };
    Ok((state, log))
}
