//! File formats, experiment configuration and the command-line front end for
//! [`gkb_core`].
//!
//! A system on disk is a directory holding `M.mtx`, `A.mtx`, `g.mtx`,
//! `r.mtx` (Matrix Market) and `meta.txt` with a line `eta=<real>`.

pub mod cli;
pub mod config;
pub mod error;
pub mod logcsv;
pub mod mm;
pub mod runner;
pub mod savings;
pub mod sysio;

pub use config::{ExperimentConfig, Overrides, PolicyConfig};
pub use error::{Error, Result};
pub use runner::{compare, prepare, run_policy, Comparison, PolicyRun, Prepared};
pub use savings::{savings_percent, SavingsRow, SavingsTable};
pub use sysio::{load_system, save_system};
