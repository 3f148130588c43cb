//! `horobcz`: window enumeration, height tables, return-map orbits,
//! verification suites and plot tables for lattice surfaces.
//!
//! Exit codes: 0 pass, 1 verification failure or runtime error, 2 bad input.

mod commands;
mod config;
mod error;
mod output;
mod plot;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "horobcz", version, about = "Horocycle return maps on lattice surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Window vectors with |x| ≤ --x-max, 0 ≤ y < --y-max.
    Enumerate,
    /// Heights below --cutoff with their totients.
    Heights,
    /// Return-map orbit from (--s, --t) at --level, or from a random start.
    Orbit,
    /// Run a verification suite: theorem12, lemma32, abel, conditions,
    /// secondmoment, detclass or oracle-bcz.
    Verify { suite: String },
    /// Plot-ready tables: gaps, beta or convergence.
    Plotdata { kind: String },
    /// Weak-mixing criterion report; summary on stdout, JSON to --out.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl From<bool> for Status {
    fn from(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

fn run(cli: Cli) -> CliResult<Status> {
    let cfg = cli.config.effective()?;
    if let Some(threads) = cfg.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Enumerate => commands::enumerate(&cfg),
        Command::Heights => commands::heights(&cfg),
        Command::Orbit => commands::orbit(&cfg),
        Command::Verify { suite } => verify::verify(&cfg, suite),
        Command::Plotdata { kind } => plot::plotdata(&cfg, kind),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
