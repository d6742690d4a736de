//! `rtloc` — RSS/TOA target localization from the command line.
//!
//! Three verbs:
//!   solve     run one solver on a measurement fixture, print the estimate
//!   bench     run the Monte Carlo solver comparison, write CSV reports
//!   scenario  generate a synthetic scenario + measurement fixture
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 solver error.

mod commands;
mod config;
mod fixture;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "rtloc", version, about = "RSS/TOA target localization solvers and benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on a measurement fixture and print the estimate.
    Solve {
        /// Solver/experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Measurement fixture produced by `scenario` (TOML).
        #[arg(long)]
        measurements: PathBuf,
        /// Solver to run: grid, gd, pso, or all (overrides the config).
        #[arg(long)]
        solver: Option<String>,
        /// Seed for the particle swarm's random stream (default 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Monte Carlo benchmark and write CSV reports.
    Bench {
        /// Solver/experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for errors.csv, cdf.csv, summary.csv, manifest.toml.
        #[arg(long)]
        out: PathBuf,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Solver subset: grid, gd, pso, or all (default all).
        #[arg(long)]
        solver: Option<String>,
        /// Skip wall-clock measurement; every time field is written as 0.
        /// Output files are then a pure function of the config and seed.
        #[arg(long)]
        no_time: bool,
    },
    /// Generate a ring scenario and one sampled measurement fixture.
    Scenario {
        /// Signal/geometry defaults (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Fixture file to write.
        #[arg(long)]
        out: PathBuf,
        /// Ring radius in meters (default: first configured radius).
        #[arg(long)]
        radius: Option<f64>,
        /// Sampling seed (default: configured master seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of receivers on the ring.
        #[arg(long)]
        n_receivers: Option<usize>,
        /// Target position as "x,y" in meters.
        #[arg(long)]
        target: Option<String>,
    },
}

/// CLI failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, unreadable/invalid input files: exit 2.
    Config(String),
    /// A solver reported an error: exit 3.
    Solver(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError::Solver(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Solver(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            config,
            measurements,
            solver,
            seed,
        } => commands::cmd_solve(&config, &measurements, solver.as_deref(), seed.unwrap_or(0)),
        Command::Bench {
            config,
            out,
            seed,
            solver,
            no_time,
        } => commands::cmd_bench(&config, &out, seed, solver.as_deref(), no_time),
        Command::Scenario {
            config,
            out,
            radius,
            seed,
            n_receivers,
            target,
        } => commands::cmd_scenario(
            &config,
            &out,
            radius,
            seed,
            n_receivers,
            target.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
