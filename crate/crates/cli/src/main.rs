//! `risbound`: error bounds for RIS-aided far-field localization.
//!
//! Subcommands: `bound` evaluates one scenario file, `sweep` runs a
//! Monte-Carlo parameter sweep, `validate` runs the numerical validation
//! suite on a desk-scale scenario. Exit codes: 0 success, 1 validation
//! failure, 2 input error.

mod output;
mod sweep;
mod validate;

use clap::{Parser, Subcommand};
use ris_bounds::localization::evaluate_bounds;
use ris_bounds::scenario::scenario_from_toml;
use ris_bounds::Scenario64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "risbound", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the position/orientation error bounds of one scenario.
    Bound {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Optional CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Drop the LOS path.
        #[arg(long)]
        no_los: bool,
    },
    /// Monte-Carlo sweep over a scenario variable with random placements.
    Sweep {
        /// Base scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Sweep specification file (TOML).
        #[arg(long)]
        sweep: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Drop the LOS path.
        #[arg(long)]
        no_los: bool,
    },
    /// Run the validation suite (oracle equivalence and structural checks).
    Validate {
        /// Scenario file (TOML); total parameter count must stay desk-scale.
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Drop the LOS path.
        #[arg(long)]
        no_los: bool,
    },
}

fn load_scenario(path: &Path, seed: Option<u64>, no_los: bool) -> Result<Scenario64, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut sc: Scenario64 =
        scenario_from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if no_los {
        sc.include_los = false;
    }
    sc.validate().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(sc)
}

fn cmd_bound(scenario: &Path, out: Option<&Path>, seed: Option<u64>, no_los: bool) -> ExitCode {
    let sc = match load_scenario(scenario, seed, no_los) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("input error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match evaluate_bounds(&sc) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("input error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("SPEB  = {} m^2", output::num(report.speb));
    println!("SOEB  = {} rad^2", output::num(report.soeb));
    println!("PEB   = {} m", output::num(report.peb()));
    println!("OEB   = {} rad", output::num(report.oeb()));
    if report.singular {
        println!("flag  : EFIM singular; bounds are infinite");
    }
    if report.degraded {
        println!("flag  : pseudo-inverse fallback used during elimination");
    }
    if let Some(path) = out {
        let name = scenario
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();
        if let Err(e) = output::write_bound_csv(path, &name, &sc, &report) {
            eprintln!("input error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bound {
            scenario,
            out,
            seed,
            no_los,
        } => cmd_bound(&scenario, out.as_deref(), seed, no_los),
        Command::Sweep {
            scenario,
            sweep,
            out,
            seed,
            trials,
            workers,
            no_los,
        } => {
            let sc = match load_scenario(&scenario, seed, no_los) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("input error: {e}");
                    return ExitCode::from(2);
                }
            };
            match sweep::run(&sc, &sweep, out.as_deref(), trials, workers) {
                Ok(()) => ExitCode::SUCCESS,
                Err(sweep::SweepError::Input(e)) => {
                    eprintln!("input error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Validate {
            scenario,
            seed,
            no_los,
        } => {
            let sc = match load_scenario(&scenario, seed, no_los) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("input error: {e}");
                    return ExitCode::from(2);
                }
            };
            match validate::run(&sc) {
                validate::Outcome::AllPassed => ExitCode::SUCCESS,
                validate::Outcome::Failures(n) => {
                    eprintln!("{n} validation check(s) failed");
                    ExitCode::from(1)
                }
                validate::Outcome::Refused(msg) => {
                    eprintln!("input error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
