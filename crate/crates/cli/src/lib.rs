//! Experiment harness for `geocap`: TOML sweep configs, CSV and JSON
//! artifacts, the residual scan on scalar-flat models and the acceptance
//! suites.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod scan;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentSpec, Method};
pub use error::CliError;
pub use run::{execute, ResultRow, RunOptions, RunOutcome};

fn load_experiment(config: &Path, opts: &RunOptions) -> Result<Experiment, CliError> {
    let mut spec = config::load(config)?;
    if let Some(out) = &opts.out {
        spec.outputs.dir = out.clone();
    }
    spec.validate(opts.level)
}

/// Validates, computes, then writes. Nothing is written unless every task succeeds.
pub fn run_config(config: &Path, opts: &RunOptions) -> Result<(RunOutcome, Vec<PathBuf>), CliError> {
    let exp = load_experiment(config, opts)?;
    let outcome = execute(&exp, opts.workers, opts.timings)?;
    let written = output::write_outcome(&exp, &outcome, &exp.spec.outputs.dir)?;
    Ok((outcome, written))
}

pub fn scan_config(config: &Path, opts: &RunOptions) -> Result<(scan::ScanReport, Vec<PathBuf>), CliError> {
    let exp = load_experiment(config, opts)?;
    let report = scan::scan(&exp, opts.workers)?;
    let written = scan::write_scan(&report, &exp.spec.outputs.dir)?;
    Ok((report, written))
}
