//! Command-line driver for the self-similar delta-barrier model.
//!
//! Every data product is a CSV file (header row, LF endings, numbers with
//! 17 significant digits) plus a JSON sidecar named after the command.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{CommandKind, Overrides, RunConfig};
use crate::error::{CliError, CliResult};

pub const THREADS_ENV: &str = "DSI_BARRIER_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "dsi-barrier",
    version,
    about = "Datasets for the self-similar delta-barrier array"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// key=value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory for CSV and JSON files
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Print the summary as JSON
    #[arg(long, global = true)]
    pub json: bool,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x0: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a0: Option<f64>,

    /// Cutoff interval index
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nc: Option<i32>,

    /// Seed for randomized sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic roots, scaling exponent and regime
    Alpha,
    /// Wavefunction with scaled copies and the ratio g(x)
    Fig1,
    /// Subcritical momentum distribution with its envelope
    Fig2,
    /// Wavefunction, slope and g(x) on a logarithmic x grid
    Wavefunction,
    /// Cutoff momentum transform on a logarithmic p grid
    Momentum,
    /// Negative-energy growth certificates and a positive-energy scattering trace
    Spectrum,
    /// Invariant and oracle suite
    Verify {
        /// Perturb b0 so the scaling check must fail
        #[arg(long)]
        inject_fault: bool,
    },
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Alpha => CommandKind::Alpha,
            Command::Fig1 => CommandKind::Fig1,
            Command::Fig2 => CommandKind::Fig2,
            Command::Wavefunction => CommandKind::Wavefunction,
            Command::Momentum => CommandKind::Momentum,
            Command::Spectrum => CommandKind::Spectrum,
            Command::Verify { .. } => CommandKind::Verify,
        }
    }
}

/// Size the global rayon pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?),
        None => None,
    };
    let flags = Overrides {
        lambda: cli.lambda,
        mu: cli.mu,
        x0: cli.x0,
        a0: cli.a0,
        n_c: cli.nc,
        seed: cli.seed,
        out_dir: cli.out.clone(),
    };
    RunConfig::resolve(cli.command.kind(), text.as_deref(), &flags)
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    configure_threads()?;
    let config = resolve(cli)?;
    match &cli.command {
        Command::Alpha => commands::alpha(&config),
        Command::Fig1 => commands::fig1(&config),
        Command::Fig2 => commands::fig2(&config),
        Command::Wavefunction => commands::wavefunction(&config),
        Command::Momentum => commands::momentum(&config),
        Command::Spectrum => commands::spectrum(&config),
        Command::Verify { inject_fault } => verify::verify(&config, *inject_fault),
    }
}
