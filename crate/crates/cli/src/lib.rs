//! Command-line front-end: ingestion, configuration merging and the
//! subcommands of the `lipfit` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use args::{Cli, Command};
use error::{CliError, CliResult};

/// Sizes the global pool from `LIPFIT_THREADS` (default: all cores).
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("LIPFIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LIPFIT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

pub fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Lbbd(a) => commands::lbbd(a),
        Command::Pem(a) => commands::pem(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Workflow(a) => commands::workflow(a),
    }
}
