//! Inner-tolerance selection.
//!
//! Each outer step asks a [`TolerancePolicy`] how accurately the next inner
//! solve must be performed. The ζ-driven rules (`Adaptive`, `Predicted`,
//! `Hybrid`, `Optimal`) loosen the tolerance as the magnitude of the latest
//! coefficients shrinks, which tracks the energy-norm error of the primal
//! iterate. `Bouras` and `Simoncini` are residual-driven baselines.
//!
//! All rules are capped (0.1 by default) and floored at [`MIN_TOLERANCE`].

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricEigen};
use crate::system::SaddleSystem;

pub const DEFAULT_CAP: f64 = 0.1;
pub const MIN_TOLERANCE: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Constant,
    Adaptive,
    Predicted,
    Hybrid,
    Optimal,
    Bouras,
    Simoncini,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::Constant,
        PolicyKind::Adaptive,
        PolicyKind::Predicted,
        PolicyKind::Hybrid,
        PolicyKind::Optimal,
        PolicyKind::Bouras,
        PolicyKind::Simoncini,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Constant => "constant",
            PolicyKind::Adaptive => "adaptive",
            PolicyKind::Predicted => "predicted",
            PolicyKind::Hybrid => "hybrid",
            PolicyKind::Optimal => "optimal",
            PolicyKind::Bouras => "bouras",
            PolicyKind::Simoncini => "simoncini",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }

    pub fn uses_residual(self) -> bool {
        matches!(self, PolicyKind::Bouras | PolicyKind::Simoncini)
    }
}

/// What a policy may look at when choosing the tolerance for outer step `k`.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInputs<'a> {
    /// Index of the coefficient about to be computed (1 for the first solve).
    pub k: usize,
    /// `|ζ_1|, ..., |ζ_{k-1}|`.
    pub zeta_hist: &'a [f64],
    /// `||b - A^T u_{k-1}||_2`, present when the policy asked for it.
    pub residual_norm: Option<f64>,
}

/// Chooses the inner tolerance of each outer step.
pub trait TolerancePolicy {
    fn next_tolerance(&mut self, inputs: &PolicyInputs<'_>) -> f64;

    /// Whether the caller must supply `residual_norm`.
    fn needs_residual(&self) -> bool {
        false
    }
}

impl<F> TolerancePolicy for F
where
    F: FnMut(&PolicyInputs<'_>) -> f64,
{
    fn next_tolerance(&mut self, inputs: &PolicyInputs<'_>) -> f64 {
        self(inputs)
    }
}

/// One of the seven built-in inner-tolerance rules.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxPolicy {
    kind: PolicyKind,
    tau: f64,
    cap: f64,
    c: f64,
    epsilon: f64,
    l: f64,
    prev_tol: f64,
}

impl RelaxPolicy {
    fn base(kind: PolicyKind, tau: f64) -> Self {
        Self {
            kind,
            tau,
            cap: DEFAULT_CAP,
            c: 1.0,
            epsilon: tau,
            l: 1.0,
            prev_tol: tau,
        }
    }

    pub fn constant(tau: f64) -> Self {
        Self::base(PolicyKind::Constant, tau)
    }

    pub fn adaptive(tau: f64) -> Self {
        Self::base(PolicyKind::Adaptive, tau)
    }

    pub fn predicted(tau: f64) -> Self {
        Self::base(PolicyKind::Predicted, tau)
    }

    pub fn hybrid(tau: f64) -> Self {
        Self::base(PolicyKind::Hybrid, tau)
    }

    pub fn optimal(tau: f64, c: f64) -> Self {
        Self {
            c,
            ..Self::base(PolicyKind::Optimal, tau)
        }
    }

    /// `epsilon / ||r_k||`; `tau` is only used if no residual is available.
    pub fn bouras(tau: f64, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::base(PolicyKind::Bouras, tau)
        }
    }

    /// `l * epsilon / ||r_k||` with `l` from [`simoncini_constant`].
    pub fn simoncini(tau: f64, epsilon: f64, l: f64) -> Self {
        Self {
            epsilon,
            l,
            ..Self::base(PolicyKind::Simoncini, tau)
        }
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self.prev_tol = self.prev_tol.min(cap);
        self
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn prev_tol(&self) -> f64 {
        self.prev_tol
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must lie in (0, 1)",
                })
            }
        };
        open_unit("tau", self.tau)?;
        open_unit("epsilon", self.epsilon)?;
        if !(self.cap > 0.0 && self.cap <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cap",
                value: self.cap,
                reason: "must lie in (0, 1]",
            });
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: self.c,
                reason: "must be positive",
            });
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "l",
                value: self.l,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    fn clamp(&self, tol: f64) -> f64 {
        tol.min(self.cap).max(MIN_TOLERANCE)
    }
}

impl TolerancePolicy for RelaxPolicy {
    fn next_tolerance(&mut self, inputs: &PolicyInputs<'_>) -> f64 {
        next_tolerance(self, inputs)
    }

    fn needs_residual(&self) -> bool {
        self.kind.uses_residual()
    }
}

/// Extrapolates the `|ζ|` sequence with the latest ratio `ζ_{k-1}/ζ_{k-2}`:
/// one step gives `ζ̃_k`, two steps give `ζ̃_{k+1}`.
///
/// Returns `None` until two positive entries are available.
pub fn predict_zeta(zeta_hist: &[f64], steps: u32) -> Option<f64> {
    let [.., older, last] = zeta_hist else {
        return None;
    };
    let (older, last) = (older.abs(), last.abs());
    if !(older > 0.0 && last > 0.0) {
        return None;
    }
    let rho = last / older;
    Some((0..steps).fold(last, |z, _| z * rho))
}

/// Tolerance for the next inner solve. Updates the `Hybrid` memory.
pub fn next_tolerance(policy: &mut RelaxPolicy, inputs: &PolicyInputs<'_>) -> f64 {
    let tau = policy.tau;
    let last = inputs
        .zeta_hist
        .last()
        .map(|z| z.abs())
        .filter(|_| inputs.zeta_hist.len() >= 2);
    let tol = match policy.kind {
        PolicyKind::Constant => tau,
        PolicyKind::Adaptive => match last {
            Some(z) => policy.clamp(tau / z),
            None => tau,
        },
        PolicyKind::Optimal => match last {
            Some(z) => policy.clamp(tau / (policy.c * z)),
            None => tau,
        },
        PolicyKind::Predicted => match predict_zeta(inputs.zeta_hist, 2) {
            Some(z2) => policy.clamp(tau / z2),
            None => tau,
        },
        PolicyKind::Hybrid => {
            let candidates = (
                last,
                predict_zeta(inputs.zeta_hist, 1),
                predict_zeta(inputs.zeta_hist, 2),
            );
            let tol = match candidates {
                (Some(z), Some(z1), Some(z2)) => {
                    let best = policy
                        .prev_tol
                        .max(tau / z)
                        .max(tau / z1)
                        .max(tau / z2);
                    policy.clamp(best)
                }
                _ => tau,
            };
            policy.prev_tol = policy.prev_tol.max(tol).min(policy.cap);
            tol
        }
        PolicyKind::Bouras | PolicyKind::Simoncini => {
            let scale = if policy.kind == PolicyKind::Simoncini {
                policy.l
            } else {
                1.0
            };
            match inputs.residual_norm {
                Some(res) if res > 0.0 => policy.clamp(scale * policy.epsilon / res),
                Some(_) => policy.cap,
                None => tau,
            }
        }
    };
    tol.max(MIN_TOLERANCE)
}

/// The problem-dependent constant of the residual-driven rule:
/// `l = σ_min(S) / (σ_max(A^T M^{-1}) · m_star)` with `S = A^T M^{-1} A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonciniConstant {
    pub l: f64,
    pub sigma_min_schur: f64,
    pub sigma_max_at_minv: f64,
}

/// Computes [`SimonciniConstant`] with dense factorizations.
///
/// `dense_cap` bounds the primal dimension that may be densified.
pub fn simoncini_constant(
    system: &SaddleSystem,
    m_star: usize,
    dense_cap: usize,
) -> Result<SimonciniConstant> {
    if m_star == 0 {
        return Err(Error::InvalidParameter {
            name: "m_star",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let x = crate::transforms::dense_minv_a(system, dense_cap, "simoncini constant")?;
    let schur = crate::transforms::schur_from_minv_a(system, &x)?;
    let schur_eig = SymmetricEigen::compute(&schur)?;
    // S is SPD, so its smallest singular value is its smallest eigenvalue.
    let sigma_min_schur = schur_eig.values.first().copied().unwrap_or(0.0);
    if !(sigma_min_schur > 0.0) {
        return Err(Error::RankDeficient(alloc::format!(
            "smallest Schur complement eigenvalue is {sigma_min_schur:e}"
        )));
    }
    // σ_max(A^T M^{-1}) = σ_max(X) with X = M^{-1} A, from the eigenvalues of X^T X.
    let gram = gram(&x);
    let gram_eig = SymmetricEigen::compute(&gram)?;
    let sigma_max_at_minv = libm::sqrt(gram_eig.values.last().copied().unwrap_or(0.0).max(0.0));
    Ok(SimonciniConstant {
        l: sigma_min_schur / (sigma_max_at_minv * m_star as f64),
        sigma_min_schur,
        sigma_max_at_minv,
    })
}

fn gram(x: &DenseMatrix) -> DenseMatrix {
    let n = x.n_cols();
    let mut g = DenseMatrix::zeros(n, n);
    for k in 0..x.n_rows() {
        let row = x.row(k);
        for i in 0..n {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..=i {
                g[(i, j)] += xi * row[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn inputs(hist: &[f64]) -> PolicyInputs<'_> {
        PolicyInputs {
            k: hist.len() + 1,
            zeta_hist: hist,
            residual_norm: None,
        }
    }

    #[test]
    fn prediction_hand_cases() {
        assert!((predict_zeta(&[0.1, 0.01], 1).unwrap() - 1e-3).abs() < 1e-18);
        assert!((predict_zeta(&[0.1, 0.01], 2).unwrap() - 1e-4).abs() < 1e-19);
        assert_eq!(predict_zeta(&[0.5, 0.5], 1), Some(0.5));
        assert_eq!(predict_zeta(&[0.5, 0.5], 2), Some(0.5));
        assert_eq!(predict_zeta(&[0.5], 1), None);
        assert_eq!(predict_zeta(&[], 2), None);
    }

    #[test]
    fn prediction_ignores_signs() {
        assert_eq!(predict_zeta(&[-0.5, 0.25], 1), predict_zeta(&[0.5, 0.25], 1));
    }

    #[test]
    fn hybrid_hand_case() {
        let mut p = RelaxPolicy::hybrid(1e-8);
        let tol = next_tolerance(&mut p, &inputs(&[0.1, 0.01]));
        assert!((tol - 1e-4).abs() < 1e-18, "tol = {tol:e}");
        assert_eq!(p.prev_tol(), tol);
    }

    #[test]
    fn adaptive_is_capped() {
        let mut p = RelaxPolicy::adaptive(1e-8);
        assert_eq!(next_tolerance(&mut p, &inputs(&[1e-8, 1e-9])), 0.1);
    }

    #[test]
    fn optimal_hand_case() {
        let mut p = RelaxPolicy::optimal(1e-8, 0.05);
        let tol = next_tolerance(&mut p, &inputs(&[0.1, 0.01]));
        assert!((tol - 2e-5).abs() < 1e-18);
    }

    #[test]
    fn bouras_hand_case() {
        let mut p = RelaxPolicy::bouras(1e-8, 1e-7);
        let tol = next_tolerance(
            &mut p,
            &PolicyInputs {
                k: 5,
                zeta_hist: &[],
                residual_norm: Some(1e-3),
            },
        );
        assert!((tol - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn residual_rules_with_zero_residual_return_cap() {
        let mut p = RelaxPolicy::simoncini(1e-8, 1e-7, 0.5).with_cap(0.05);
        let tol = next_tolerance(
            &mut p,
            &PolicyInputs {
                k: 3,
                zeta_hist: &[],
                residual_norm: Some(0.0),
            },
        );
        assert_eq!(tol, 0.05);
    }

    #[test]
    fn warm_up_emits_tau() {
        for kind in [
            PolicyKind::Adaptive,
            PolicyKind::Predicted,
            PolicyKind::Hybrid,
            PolicyKind::Optimal,
        ] {
            let mut p = RelaxPolicy::base(kind, 1e-8);
            assert_eq!(next_tolerance(&mut p, &inputs(&[])), 1e-8);
            assert_eq!(next_tolerance(&mut p, &inputs(&[0.3])), 1e-8);
        }
    }

    #[test]
    fn constant_never_moves() {
        let mut p = RelaxPolicy::constant(1e-6);
        for hist in [vec![], vec![1.0, 1e-3], vec![1.0, 1e-3, 1e-9]] {
            assert_eq!(next_tolerance(&mut p, &inputs(&hist)), 1e-6);
        }
    }

    #[test]
    fn floor_applies() {
        let mut p = RelaxPolicy::adaptive(1e-17 * 0.5);
        // tau itself is below the floor
        assert_eq!(next_tolerance(&mut p, &inputs(&[])), MIN_TOLERANCE);
    }

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(PolicyKind::from_name(k.name()), Some(k));
        }
        assert_eq!(PolicyKind::from_name("HYBRID"), Some(PolicyKind::Hybrid));
        assert_eq!(PolicyKind::from_name("nope"), None);
    }

    #[test]
    fn validation() {
        assert!(RelaxPolicy::hybrid(1e-8).validate().is_ok());
        assert!(RelaxPolicy::hybrid(0.0).validate().is_err());
        assert!(RelaxPolicy::hybrid(1e-8).with_cap(1.5).validate().is_err());
        assert!(RelaxPolicy::optimal(1e-8, 0.0).validate().is_err());
        assert!(RelaxPolicy::bouras(1e-8, 2.0).validate().is_err());
    }

    #[test]
    fn closures_are_policies() {
        let mut schedule = |i: &PolicyInputs<'_>| if i.k <= 2 { 1e-3 } else { 1e-14 };
        assert_eq!(schedule.next_tolerance(&inputs(&[1.0])), 1e-3);
        assert_eq!(schedule.next_tolerance(&inputs(&[1.0, 0.5])), 1e-14);
        assert!(!schedule.needs_residual());
    }
}
