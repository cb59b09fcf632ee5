use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geocap_cli::output::fmt12;
use geocap_cli::verify::{run_suite, Suite};
use geocap_cli::{run_config, scan_config, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "geocap", version, about = "Capacity of small geodesic annuli and the scalar curvature it encodes")]
struct Cli {
    /// Concurrent tasks.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Variational solver level, overriding the config.
    #[arg(long, global = true, value_name = "LEVEL")]
    resolution: Option<u32>,
    /// Record per-task wall time in the CSV `runtime_ms` column.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep config and write CSV, JSON and plot files.
    Run { config: PathBuf },
    /// Run an acceptance suite: fast or full.
    Verify { suite: String },
    /// Residual coefficients for a scalar-flat model config.
    ScanConjecture { config: PathBuf },
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { workers: cli.workers, out: cli.out, level: cli.resolution, timings: cli.timings };
    match cli.command {
        Command::Run { config } => match run_config(&config, &opts) {
            Ok((outcome, written)) => {
                let report = &outcome.report;
                println!("{}: {} rows in {:.1} s", report.model, report.rows.len(), report.timings.total_ms / 1e3);
                for fit in &report.fits {
                    match (&fit.fit, &fit.sign) {
                        (Some(f), Some(sign)) => println!(
                            "  lambda={} {}: kappa_hat={} (predicted {}), S_hat={}, sign {}",
                            fmt12(fit.lambda),
                            fit.method,
                            fmt12(f.kappa_hat),
                            fmt12(fit.predicted_kappa),
                            fmt12(f.s_hat),
                            sign.as_str()
                        ),
                        _ => println!("  lambda={} {}: no fit ({})", fmt12(fit.lambda), fit.method, fit.skipped.as_deref().unwrap_or("")),
                    }
                }
                for check in report.invariant_checks.iter().filter(|c| !c.passed) {
                    eprintln!("warning: invariant {} failed (measured {:e})", check.name, check.measured);
                }
                for path in written {
                    println!("  wrote {}", path.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Verify { suite } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            if cli.workers > 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
            }
            let outcomes = run_suite(suite, |o| println!("{o}"));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::ScanConjecture { config } => match scan_config(&config, &opts) {
            Ok((report, written)) => {
                println!("{}", report.model);
                for row in &report.rows {
                    println!(
                        "  lambda={}: kappa_hat={} +- {}, r4 coefficient={}, sign {}",
                        fmt12(row.lambda),
                        fmt12(row.fit.kappa_hat),
                        fmt12(row.fit.dead_zone()),
                        fmt12(row.r4_coefficient),
                        row.sign.as_str()
                    );
                }
                for path in written {
                    println!("  wrote {}", path.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
