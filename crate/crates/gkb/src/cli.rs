//! The `gkb` command: `solve`, `compare` and `generate`.

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};
use gkb_core::problems::generate;
use gkb_core::SolveStatus;

use crate::config::{ExperimentConfig, Overrides};
use crate::error::{Error, Result};
use crate::logcsv::format_log;
use crate::runner::{compare, prepare, run_policy, Comparison};
use crate::savings::SavingsTable;
use crate::{mm, sysio};

#[derive(Debug, Parser)]
#[command(name = "gkb", version, about = "Inner-outer Golub-Kahan solver for saddle-point systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system with the first configured policy.
    Solve(Overrides),
    /// Run every policy on the same system and print a savings table.
    Compare(Overrides),
    /// Write a generated problem to a Matrix Market directory.
    Generate(Overrides),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_MAXIT: u8 = 2;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    match &cli.command {
        Command::Solve(ov) => {
            let status = cmd_solve(&ExperimentConfig::resolve(ov)?, out)?;
            Ok(match status {
                SolveStatus::MaxIterations => EXIT_MAXIT,
                _ => EXIT_OK,
            })
        }
        Command::Compare(ov) => {
            cmd_compare(&ExperimentConfig::resolve(ov)?, out)?;
            Ok(EXIT_OK)
        }
        Command::Generate(ov) => {
            cmd_generate(&ExperimentConfig::resolve(ov)?, out)?;
            Ok(EXIT_OK)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

pub fn cmd_solve(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<SolveStatus> {
    let prepared = prepare(cfg)?;
    let spec = &cfg.policies[0];
    let run = run_policy(&prepared, cfg, spec, &spec.kind)?;
    if let Some(path) = &cfg.output.log {
        write_file(path, &format_log(&run.log))?;
    }
    if let Some(dir) = &cfg.output.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        mm::write_vector(dir.join("w.mtx"), &run.w)?;
        mm::write_vector(dir.join("p.mtx"), &run.p)?;
    }
    let log = &run.log;
    writeln!(
        out,
        "status={} policy={} outer={} cum_inner={} lower_bound={:e} wall={:.3}s",
        log.status.name(),
        run.label,
        log.outer_iterations(),
        log.cum_inner,
        log.final_lower_bound,
        run.elapsed.as_secs_f64()
    )
    .map_err(stdout_err)?;
    Ok(log.status)
}

/// Prints the table, writes the savings CSV to `output.out` and one log per
/// policy into the directory `output.log`. Failed runs are reported on
/// stderr and appear with `-` entries.
pub fn cmd_compare(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<SavingsTable> {
    let prepared = prepare(cfg)?;
    let Comparison {
        labels,
        runs,
        table,
    } = compare(&prepared, cfg);
    for (label, run) in labels.iter().zip(&runs) {
        match run {
            Ok(run) => {
                if let Some(dir) = &cfg.output.log {
                    write_file(&dir.join(format!("{label}.csv")), &format_log(&run.log))?;
                }
            }
            Err(e) => eprintln!("{label}: {e}"),
        }
    }
    if let Some(path) = &cfg.output.out {
        write_file(path, &table.to_csv())?;
    }
    writeln!(out, "{}", prepared.description).map_err(stdout_err)?;
    write!(out, "{}", table.to_text()).map_err(stdout_err)?;
    Ok(table)
}

/// Writes the raw generated system (no transforms), plus `w_exact.mtx` and
/// `p_exact.mtx` when the generator provides them.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let dir = cfg
        .output
        .out
        .as_deref()
        .ok_or_else(|| Error::field("--out", "generate needs an output directory"))?;
    let problem = generate(&cfg.problem.generator, &cfg.generator_params())?;
    sysio::save_system(dir, &problem.system)?;
    if let Some(w) = &problem.w_exact {
        mm::write_vector(dir.join("w_exact.mtx"), w)?;
    }
    if let Some(p) = &problem.p_exact {
        mm::write_vector(dir.join("p_exact.mtx"), p)?;
    }
    writeln!(out, "{} -> {}", problem.description, dir.display()).map_err(stdout_err)?;
    Ok(())
}
