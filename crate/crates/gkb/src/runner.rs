//! Builds the system an experiment asks for and runs policies on it.

use std::time::{Duration, Instant};

use gkb_core::problems::generate;
use gkb_core::relax::simoncini_constant;
use gkb_core::transforms::{augment, deflated_solve, dense_saddle_solve, DEFAULT_NNZ_CAP};
use gkb_core::{
    gkb_solve_with, CgSolver, Diagnostics, DirectSolver, InnerSolver, PolicyKind, RelaxPolicy,
    RunLog, SaddleSystem,
};

use crate::config::{ExperimentConfig, InnerKind, PolicyConfig};
use crate::error::Result;
use crate::savings::{SavingsRow, SavingsTable};
use crate::sysio::load_system;

/// The system after all transforms, shared read-only by every run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub system: SaddleSystem,
    /// Primal reference from a dense solve, when true errors were requested.
    pub reference_w: Option<Vec<f64>>,
    pub description: String,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let (system, mut description) = match &cfg.problem.path {
        Some(dir) => (load_system(dir)?, format!("system loaded from {}", dir.display())),
        None => {
            let g = generate(&cfg.problem.generator, &cfg.generator_params())?;
            (g.system, g.description)
        }
    };
    let system = match cfg.transform.eta {
        Some(eta) => {
            description.push_str(&format!(", augmented with eta = {eta}"));
            augment(&system, eta, DEFAULT_NNZ_CAP)?
        }
        None => system,
    };
    let reference_w = if cfg.output.true_error {
        Some(dense_saddle_solve(&system, cfg.solver.dense_cap)?.w)
    } else {
        None
    };
    Ok(Prepared {
        system,
        reference_w,
        description,
    })
}

pub fn build_policy(
    spec: &PolicyConfig,
    cfg: &ExperimentConfig,
    system: &SaddleSystem,
) -> Result<RelaxPolicy> {
    let tau = cfg.solver.tau;
    let epsilon = spec.epsilon.unwrap_or(cfg.solver.outer_tol);
    let policy = match spec.policy_kind() {
        PolicyKind::Constant => RelaxPolicy::constant(tau),
        PolicyKind::Adaptive => RelaxPolicy::adaptive(tau),
        PolicyKind::Predicted => RelaxPolicy::predicted(tau),
        PolicyKind::Hybrid => RelaxPolicy::hybrid(tau),
        PolicyKind::Optimal => RelaxPolicy::optimal(tau, spec.c),
        PolicyKind::Bouras => RelaxPolicy::bouras(tau, epsilon),
        PolicyKind::Simoncini => {
            let l = match spec.l {
                Some(l) => l,
                None => simoncini_constant(system, spec.m_star, cfg.solver.dense_cap)?.l,
            };
            RelaxPolicy::simoncini(tau, epsilon, l)
        }
    }
    .with_cap(cfg.solver.cap);
    policy.validate()?;
    Ok(policy)
}

#[derive(Debug, Clone)]
pub struct PolicyRun {
    pub label: String,
    pub log: RunLog,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub elapsed: Duration,
}

/// One full solve of the prepared system, deflated when `k_defl > 0`.
pub fn run_policy(
    prepared: &Prepared,
    cfg: &ExperimentConfig,
    spec: &PolicyConfig,
    label: &str,
) -> Result<PolicyRun> {
    let start = Instant::now();
    let system = &prepared.system;
    let options = cfg.gkb_options();
    let mut policy = build_policy(spec, cfg, system)?;
    let m = system.m();
    let mut inner: Box<dyn InnerSolver + '_> = match cfg.solver.inner {
        InnerKind::Cg => Box::new(CgSolver::new(
            m,
            cfg.solver.inner_maxit.unwrap_or(10 * m.n_rows().max(1)),
        )),
        InnerKind::Direct => Box::new(DirectSolver::new(m, cfg.solver.dense_cap)?),
    };
    let (log, w, p) = if cfg.transform.k_defl > 0 {
        let sol = deflated_solve(
            system,
            cfg.transform.k_defl,
            cfg.solver.dense_cap,
            &options,
            &mut policy,
            &mut *inner,
        )?;
        (sol.log, sol.w, sol.p)
    } else {
        let diagnostics = Diagnostics {
            reference_w: prepared.reference_w.as_deref(),
        };
        let sol = gkb_solve_with(system, &options, &mut policy, &mut *inner, diagnostics)?;
        (sol.log, sol.w, sol.p)
    };
    Ok(PolicyRun {
        label: label.into(),
        log,
        w,
        p,
        elapsed: start.elapsed(),
    })
}

/// The configured policies with `constant` prepended when missing.
pub fn compare_policies(cfg: &ExperimentConfig) -> Vec<PolicyConfig> {
    let mut specs = cfg.policies.clone();
    if !specs.iter().any(|p| p.policy_kind() == PolicyKind::Constant) {
        specs.insert(0, PolicyConfig::of_kind(PolicyKind::Constant));
    }
    specs
}

/// Row labels: the policy name, suffixed with its position when the same
/// name appears more than once.
pub fn labels(specs: &[PolicyConfig]) -> Vec<String> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = s.policy_kind().name();
            let repeated = specs.iter().filter(|o| o.policy_kind().name() == name).count() > 1;
            if repeated {
                format!("{name}-{i}")
            } else {
                name.to_string()
            }
        })
        .collect()
}

#[derive(Debug)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub runs: Vec<Result<PolicyRun>>,
    pub table: SavingsTable,
}

/// Runs every policy in its own thread; results keep the policy order.
pub fn compare(prepared: &Prepared, cfg: &ExperimentConfig) -> Comparison {
    let specs = compare_policies(cfg);
    let labels = labels(&specs);
    let runs: Vec<Result<PolicyRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .zip(&labels)
            .map(|(spec, label)| scope.spawn(move || run_policy(prepared, cfg, spec, label)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("policy run panicked"))
            .collect()
    });
    let rows = labels
        .iter()
        .zip(&runs)
        .map(|(label, run)| match run {
            Ok(run) => SavingsRow {
                policy: label.clone(),
                cum_inner: Some(run.log.cum_inner),
                converged: run.log.status.is_converged(),
                final_lower_bound: Some(run.log.final_lower_bound),
            },
            Err(_) => SavingsRow {
                policy: label.clone(),
                cum_inner: None,
                converged: false,
                final_lower_bound: None,
            },
        })
        .collect();
    Comparison {
        labels,
        runs,
        table: SavingsTable::new(rows),
    }
}
