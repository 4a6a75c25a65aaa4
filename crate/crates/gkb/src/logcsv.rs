//! CSV serialization of a run log, one row per outer iteration.

use std::fmt::Write as _;

use gkb_core::RunLog;

pub const LOG_HEADER: &str =
    "k,inner_iters,cum_inner,tol_used,zeta_abs,lower_bound,dual_residual,true_error";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Floats use Rust's shortest round-trip `{:e}` form; absent values are blank.
pub fn format_log(log: &RunLog) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    let mut cum = 0usize;
    for rec in &log.records {
        cum += rec.inner_iterations;
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e},{},{}",
            rec.k,
            rec.inner_iterations,
            cum,
            rec.inner_tol_used,
            rec.zeta_abs,
            rec.lower_bound,
            opt(rec.dual_residual),
            opt(rec.true_error),
        );
    }
    s
}
