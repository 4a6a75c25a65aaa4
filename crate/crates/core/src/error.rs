use alloc::string::String;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    /// `x^T M x < 0` while evaluating an energy norm.
    #[error("indefinite quadratic form: x^T M x = {value:e}")]
    Indefinite { value: f64 },

    /// A non-positive pivot or curvature was met where an SPD matrix was required.
    #[error("matrix is not symmetric positive definite ({context}, value {value:e})")]
    NotPositiveDefinite { context: &'static str, value: f64 },

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("numerical breakdown: {0}")]
    Breakdown(String),

    #[error("{what} of size {size} exceeds the configured cap of {cap}; {hint}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("right-hand side is zero; the solution is u = 0")]
    TrivialRhs,

    #[error("invalid parameter {name} = {value:e}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
