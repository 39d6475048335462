//! Command-line front end for the stake-weighted voting power toolkit:
//! power indices for concrete stake files, analytic quota curves, quota-grid
//! simulation sweeps, distribution fitting, and budget selection.

mod commands;
mod io;
mod verify;

use clap::Parser;
use std::process;
use thiserror::Error;

/// Failure classes mapped to process exit codes: 1 usage, 2 data, 3 numeric.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<stakepower_core::Error> for CliError {
    fn from(e: stakepower_core::Error) -> Self {
        use stakepower_core::Error::*;
        match e {
            // game and configuration failures trace back to flag values
            Game(_) | Config(_) => CliError::Usage(e.to_string()),
            Stochastic(_) | Analytic(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<stakepower_core::GameError> for CliError {
    fn from(e: stakepower_core::GameError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<stakepower_core::StochasticError> for CliError {
    fn from(e: stakepower_core::StochasticError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<stakepower_core::AnalyticError> for CliError {
    fn from(e: stakepower_core::AnalyticError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "stakepower",
    version,
    about = "Power-imbalance analysis for stake-weighted quota voting"
)]
struct Cli {
    #[command(subcommand)]
    cmd: commands::Cmd,
}

fn main() {
    process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here as non-error displays
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
