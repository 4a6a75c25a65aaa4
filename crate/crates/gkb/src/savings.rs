//! Savings tables: cumulative inner iterations of each policy against the
//! constant-tolerance run.

use std::fmt::Write as _;

pub const SAVINGS_HEADER: &str = "policy,cum_inner,savings_percent,converged,final_lower_bound";

/// Outcome of one policy. `cum_inner` and `final_lower_bound` are `None`
/// when the run failed with an error.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingsRow {
    pub policy: String,
    pub cum_inner: Option<usize>,
    pub converged: bool,
    pub final_lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsTable {
    pub rows: Vec<SavingsRow>,
    /// Reference total, from the first `constant` row (also `constant-<i>`).
    pub baseline: Option<usize>,
}

/// `100 (1 - cum / baseline)`.
pub fn savings_percent(cum_inner: usize, baseline: usize) -> f64 {
    100.0 * (1.0 - cum_inner as f64 / baseline as f64)
}

pub fn format_percent(p: f64) -> String {
    let s = format!("{p:.2}");
    // "-0.00" only arises from rounding a tiny negative value
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

impl SavingsTable {
    pub fn new(rows: Vec<SavingsRow>) -> Self {
        let baseline = rows
            .iter()
            .find(|r| r.policy == "constant" || r.policy.starts_with("constant-"))
            .and_then(|r| r.cum_inner)
            .filter(|&c| c > 0);
        Self { rows, baseline }
    }

    /// Savings of a row, or `None` when it did not converge or there is no
    /// usable baseline.
    pub fn savings(&self, row: &SavingsRow) -> Option<f64> {
        match (row.converged, row.cum_inner, self.baseline) {
            (true, Some(c), Some(base)) => Some(savings_percent(c, base)),
            _ => None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(SAVINGS_HEADER);
        s.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                row.policy,
                row.cum_inner.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
                self.savings(row).map(format_percent).unwrap_or_else(|| "-".into()),
                row.converged,
                row.final_lower_bound
                    .map(|b| format!("{b:e}"))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        s
    }

    /// Aligned plain-text rendering for the terminal.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<10} {:>10} {:>9} {:>9} {:>12}\n",
            "policy", "cum_inner", "savings%", "converged", "lower_bound"
        );
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{:<10} {:>10} {:>9} {:>9} {:>12}",
                row.policy,
                row.cum_inner.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
                self.savings(row).map(format_percent).unwrap_or_else(|| "-".into()),
                if row.converged { "yes" } else { "no" },
                row.final_lower_bound
                    .map(|b| format!("{b:.3e}"))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        s
    }
}
