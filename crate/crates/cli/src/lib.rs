//! Command-line front end for the `qlight` model: configuration parsing,
//! figure-style data sets as CSV, photon-stream simulation and rate reports.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qlight::Scenario;

pub use commands::Outcome;
pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] qlight::Error),
    #[error("cannot write `{path}`: {reason}")]
    Io { path: String, reason: String },
}

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 1;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_VALIDATION,
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Model(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qlight",
    version,
    about = "Emission statistics of a nanoparticle coupled to a quantum emitter"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if needed.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `scenario`: `nonresonant` or `resonant`.
    #[arg(long, global = true, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse::<Scenario>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Emission spectra over the V0/Delta sweep.
    Spectrum,
    /// Normalized g2 for both branches and both excitation schemes.
    G2,
    /// Photon streams with coincidence histogram, Fano factor and rate.
    Trajectory,
    /// Dressed-state frequencies, rates, populations and photon rates.
    Rates,
    /// Stationary populations.
    SteadyState,
}

/// Loads the configuration, applies command-line overrides and runs the
/// command.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::Io {
        path: "<none>".into(),
        reason: "--config is required".into(),
    })?;
    let mut cfg = parse_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.trajectory.master_seed = seed;
    }
    if let Some(s) = cli.scenario {
        cfg.params.scenario = s;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io {
        path: out.display().to_string(),
        reason: e.to_string(),
    })?;
    run_command(cli.command, &cfg, &out)
}

pub fn run_command(
    command: Command,
    cfg: &RunConfig,
    out: &std::path::Path,
) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum => commands::cmd_spectrum(cfg, out),
        Command::G2 => commands::cmd_g2(cfg, out),
        Command::Trajectory => commands::cmd_trajectory(cfg, out),
        Command::Rates => commands::cmd_rates(cfg, out),
        Command::SteadyState => commands::cmd_steady_state(cfg, out),
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(r) = outcome.report {
                print!("{r}");
            }
            for f in outcome.files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
