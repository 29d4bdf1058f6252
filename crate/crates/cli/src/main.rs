mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;

/// Steady states and phases of weakly driven, chirally coupled dissimilar arrays.
///
/// Angles (xi1, xi2, theta and all axes) are given in units of π.
#[derive(Debug, Parser)]
#[command(name = "chiral-array", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set geometry.n=200`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one steady state and write its population profile.
    Solve,
    /// Evaluate B_D and phase labels over a (D, xi2) grid.
    Sweep,
    /// Locate the half-depletion crossing for each array size.
    Critical,
    /// Fit the two-power-law scaling of the critical spacing.
    Fit,
    /// Report phase labels under every interface assignment.
    Classify,
    /// Reproduce the reference phase gallery.
    Gallery,
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let mut config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(out) = cli.out {
        config.output.directory = out;
    }
    match cli.command {
        Command::Solve => commands::run_solve(&config),
        Command::Sweep => commands::run_sweep(&config),
        Command::Critical => commands::run_critical(&config),
        Command::Fit => commands::run_fit(&config),
        Command::Classify => commands::run_classify(&config),
        Command::Gallery => commands::run_gallery(&config),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
