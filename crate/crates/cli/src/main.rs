//! `har`: fit, forecast and evaluate house-price-at-risk models from a
//! TOML run configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use har_core::Error;

/// Validation problems exit with 2, everything else that fails with 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Format(_) | Error::Ordering(_) | Error::Parameter(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "har", version, about = "House-price-at-risk pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for synthetic data; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the adaptive-LASSO non-crossing model for every spec and horizon.
    Fit(CommonArgs),
    /// Expanding-window forecasts and their quantile-weighted scores.
    Forecast(CommonArgs),
    /// Uncertainty, skewness and tail expectations of the fitted models.
    Risk(CommonArgs),
    /// VAR connectedness between ES, EL and the systemic risk column.
    Spillover(CommonArgs),
    /// Write the seeded synthetic panel.
    Synth(CommonArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, kind) = match cli.command {
        Command::Fit(a) => (a, commands::Kind::Fit),
        Command::Forecast(a) => (a, commands::Kind::Forecast),
        Command::Risk(a) => (a, commands::Kind::Risk),
        Command::Spillover(a) => (a, commands::Kind::Spillover),
        Command::Synth(a) => (a, commands::Kind::Synth),
    };
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    commands::execute(kind, &args)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(1),
            }
        }
    }
}
