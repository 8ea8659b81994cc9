//! `qhopfield`: capacity queries, phase-diagram sweeps, mean-field dynamics,
//! small-N Lindblad runs and closed-form limits.

mod commands;
mod config;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::Config;
use error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "qhopfield", version, about = "Storage capacity and dynamics of open quantum Hopfield networks")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical load α_c at a single (m, T, Ω) point.
    Capacity(commands::capacity::CapacityArgs),
    /// α_c on a (T, Ω) grid, written as CSV plus a gnuplot script.
    Sweep(commands::sweep::SweepArgs),
    /// Mean-field overlap trajectory.
    Dynamics(commands::dynamics::DynamicsArgs),
    /// Exact Lindblad evolution of a few spins.
    Lindblad(commands::lindblad::LindbladArgs),
    /// Closed-form limits of the capacity.
    Limits(commands::limits::LimitsArgs),
}

/// Either a temperature or an inverse temperature.
#[derive(Debug, Clone, Args)]
pub struct Temperature {
    /// Temperature T (0 for zero temperature).
    #[arg(long, conflicts_with = "beta")]
    pub temp: Option<f64>,
    /// Inverse temperature β.
    #[arg(long)]
    pub beta: Option<f64>,
}

impl Temperature {
    pub fn resolve(&self, config: &Config) -> Result<Option<f64>, CliError> {
        config::resolve_beta(self.temp, self.beta, config)
    }

    pub fn require(&self, config: &Config) -> Result<f64, CliError> {
        self.resolve(config)?
            .ok_or_else(|| CliError::Usage("one of --temp or --beta is required".into()))
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let config = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Capacity(a) => commands::capacity::run(a, &config),
        Command::Sweep(a) => commands::sweep::run(a, &config),
        Command::Dynamics(a) => commands::dynamics::run(a, &config),
        Command::Lindblad(a) => commands::lindblad::run(a, &config),
        Command::Limits(a) => commands::limits::run(a, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qhopfield: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
