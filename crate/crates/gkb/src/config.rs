//! JSON experiment configuration with command-line overrides.

use std::path::{Path, PathBuf};

use gkb_core::problems::{GeneratorParams, GENERATOR_NAMES};
use gkb_core::transforms::DEFAULT_SCHUR_CAP;
use gkb_core::{GkbOptions, PolicyKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub transform: TransformConfig,
    pub solver: SolverConfig,
    /// Defaults to a single constant-tolerance run.
    pub policies: Vec<PolicyConfig>,
    pub output: OutputConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            transform: TransformConfig::default(),
            solver: SolverConfig::default(),
            policies: vec![PolicyConfig::default()],
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

/// A generated problem, or a system directory when `path` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub generator: String,
    pub path: Option<PathBuf>,
    pub n: usize,
    pub nx: usize,
    pub ny: usize,
    pub length: f64,
    pub m: usize,
    pub cond: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let p = GeneratorParams::default();
        Self {
            generator: "mixed-poisson".into(),
            path: None,
            n: p.n,
            nx: p.nx,
            ny: p.ny,
            length: p.length,
            m: p.m,
            cond: p.cond,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    /// Augmented Lagrangian parameter; absent means no augmentation.
    pub eta: Option<f64>,
    /// Number of smallest Schur eigendirections to deflate.
    pub k_defl: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerKind {
    #[default]
    Cg,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub outer_tol: f64,
    pub tau: f64,
    pub delay: usize,
    pub maxit: Option<usize>,
    /// CG iteration limit per inner solve; absent means `10 * m`.
    pub inner_maxit: Option<usize>,
    /// Upper bound on every inner tolerance.
    pub cap: f64,
    /// Largest dimension that may be factored or eigendecomposed densely.
    pub dense_cap: usize,
    pub inner: InnerKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = GkbOptions::default();
        Self {
            outer_tol: o.outer_tol,
            tau: o.tau,
            delay: o.delay,
            maxit: None,
            inner_maxit: None,
            cap: o.tol_cap,
            dense_cap: DEFAULT_SCHUR_CAP,
            inner: InnerKind::Cg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: String,
    /// Safety factor of the optimal rule.
    pub c: f64,
    /// Target precision of the residual-driven rules; defaults to `outer_tol`.
    pub epsilon: Option<f64>,
    /// Expected outer iteration count in the Simoncini constant.
    pub m_star: usize,
    /// Explicit Simoncini constant; computed densely when absent.
    pub l: Option<f64>,
}

pub const DEFAULT_C: f64 = 0.05;
pub const DEFAULT_M_STAR: usize = 100;

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: "constant".into(),
            c: DEFAULT_C,
            epsilon: None,
            m_star: DEFAULT_M_STAR,
            l: None,
        }
    }
}

impl PolicyConfig {
    pub fn of_kind(kind: PolicyKind) -> Self {
        Self {
            kind: kind.name().into(),
            ..Self::default()
        }
    }

    /// Panics on an unknown kind; call [`ExperimentConfig::validate`] first.
    pub fn policy_kind(&self) -> PolicyKind {
        PolicyKind::from_name(&self.kind).expect("policy kind validated")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// `solve`: CSV log file. `compare`: directory for one log per policy.
    pub log: Option<PathBuf>,
    /// `solve`: directory for the solution. `compare`: savings CSV.
    /// `generate`: system directory.
    pub out: Option<PathBuf>,
    /// Fill the `true_error` column from a dense reference solve.
    pub true_error: bool,
    /// Fill the `dual_residual` column.
    pub residual: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            log: None,
            out: None,
            true_error: false,
            residual: true,
        }
    }
}

/// Values given on the command line; each one that is set replaces the
/// corresponding config entry.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Generator name: mixed-poisson, mac-stokes or random.
    #[arg(long)]
    pub problem: Option<String>,
    /// Load the system from a Matrix Market directory instead.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Grid size (mixed-poisson) or dual dimension (random).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Channel length of the Stokes problem.
    #[arg(long)]
    pub length: Option<f64>,
    /// Primal dimension of the random problem.
    #[arg(long)]
    pub m: Option<usize>,
    /// Condition number of M in the random problem.
    #[arg(long)]
    pub cond: Option<f64>,
    /// Augmented Lagrangian parameter.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub k_defl: Option<usize>,
    /// Policy name; repeat to run several. Replaces the configured list.
    #[arg(long = "policy")]
    pub policies: Vec<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub m_star: Option<usize>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long)]
    pub delay: Option<usize>,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long)]
    pub inner_maxit: Option<usize>,
    /// Inner solver: cg or direct.
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record the true M-norm error against a dense reference solve.
    #[arg(long)]
    pub true_error: bool,
}

impl ExperimentConfig {
    pub fn from_json(origin: &str, text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            path: origin.into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&path.display().to_string(), &text)
    }

    /// Reads `--config` if given, then applies the remaining flags.
    pub fn resolve(ov: &Overrides) -> Result<Self> {
        let mut cfg = match &ov.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        cfg.apply(ov)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<()> {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        let p = &mut self.problem;
        if let Some(name) = &ov.problem {
            p.generator = name.clone();
            p.path = None;
        }
        if ov.path.is_some() {
            p.path = ov.path.clone();
        }
        set(&mut p.n, &ov.n);
        set(&mut p.nx, &ov.nx);
        set(&mut p.ny, &ov.ny);
        set(&mut p.length, &ov.length);
        set(&mut p.m, &ov.m);
        set(&mut p.cond, &ov.cond);
        if ov.eta.is_some() {
            self.transform.eta = ov.eta;
        }
        set(&mut self.transform.k_defl, &ov.k_defl);
        let s = &mut self.solver;
        set(&mut s.tau, &ov.tau);
        set(&mut s.outer_tol, &ov.outer_tol);
        set(&mut s.delay, &ov.delay);
        if ov.maxit.is_some() {
            s.maxit = ov.maxit;
        }
        if ov.inner_maxit.is_some() {
            s.inner_maxit = ov.inner_maxit;
        }
        if let Some(inner) = &ov.inner {
            s.inner = match inner.to_ascii_lowercase().as_str() {
                "cg" => InnerKind::Cg,
                "direct" => InnerKind::Direct,
                other => {
                    return Err(Error::field(
                        "--inner",
                        format!("'{other}' is not one of cg, direct"),
                    ))
                }
            };
        }
        if !ov.policies.is_empty() {
            self.policies = ov
                .policies
                .iter()
                .map(|k| PolicyConfig {
                    kind: k.clone(),
                    ..PolicyConfig::default()
                })
                .collect();
        }
        for pol in &mut self.policies {
            set(&mut pol.c, &ov.c);
            if ov.epsilon.is_some() {
                pol.epsilon = ov.epsilon;
            }
            set(&mut pol.m_star, &ov.m_star);
        }
        set(&mut self.seed, &ov.seed);
        if ov.log.is_some() {
            self.output.log = ov.log.clone();
        }
        if ov.out.is_some() {
            self.output.out = ov.out.clone();
        }
        if ov.true_error {
            self.output.true_error = true;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.path.is_none() && !GENERATOR_NAMES.contains(&p.generator.as_str()) {
            return Err(Error::field(
                "problem.generator",
                format!(
                    "unknown generator '{}'; valid names: {}",
                    p.generator,
                    GENERATOR_NAMES.join(", ")
                ),
            ));
        }
        if let Some(eta) = self.transform.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::field("transform.eta", format!("{eta} is not positive")));
            }
        }
        let s = &self.solver;
        let open_unit = |field: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::field(field, format!("{v} is not in (0, 1)")))
            }
        };
        open_unit("solver.outer_tol", s.outer_tol)?;
        open_unit("solver.tau", s.tau)?;
        if !(s.cap > 0.0 && s.cap <= 1.0) {
            return Err(Error::field("solver.cap", format!("{} is not in (0, 1]", s.cap)));
        }
        if s.delay == 0 {
            return Err(Error::field("solver.delay", "must be at least 1"));
        }
        if s.maxit == Some(0) {
            return Err(Error::field("solver.maxit", "must be at least 1"));
        }
        if s.inner_maxit == Some(0) {
            return Err(Error::field("solver.inner_maxit", "must be at least 1"));
        }
        if self.policies.is_empty() {
            return Err(Error::field("policies", "at least one policy is required"));
        }
        for (i, pol) in self.policies.iter().enumerate() {
            if PolicyKind::from_name(&pol.kind).is_none() {
                let names: Vec<_> = PolicyKind::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::field(
                    format!("policies[{i}].kind"),
                    format!("unknown policy '{}'; valid names: {}", pol.kind, names.join(", ")),
                ));
            }
            if !(pol.c > 0.0 && pol.c.is_finite()) {
                return Err(Error::field(format!("policies[{i}].c"), "must be positive"));
            }
            if let Some(eps) = pol.epsilon {
                open_unit(&format!("policies[{i}].epsilon"), eps)?;
            }
            if pol.m_star == 0 {
                return Err(Error::field(format!("policies[{i}].m_star"), "must be at least 1"));
            }
            if let Some(l) = pol.l {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::field(format!("policies[{i}].l"), "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn generator_params(&self) -> GeneratorParams {
        let p = &self.problem;
        GeneratorParams {
            n: p.n,
            nx: p.nx,
            ny: p.ny,
            length: p.length,
            m: p.m,
            cond: p.cond,
            seed: self.seed,
        }
    }

    pub fn gkb_options(&self) -> GkbOptions {
        let s = &self.solver;
        GkbOptions {
            outer_tol: s.outer_tol,
            delay: s.delay,
            maxit: s.maxit,
            tau: s.tau,
            tol_cap: s.cap,
            record_basis: false,
            track_residual: self.output.residual,
        }
    }
}
