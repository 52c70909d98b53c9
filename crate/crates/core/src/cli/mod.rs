//! Command-line front end: argument definitions, scenario files and the
//! `simulate`, `recover`, `noise-study` and `presets` commands.

mod commands;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::run;

use crate::error::Error;

/// Exit status for configuration and parse errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when the delay grid aliases the spectral band.
pub const EXIT_ALIASING: i32 = 3;
/// Exit status for a trace with non-uniform delays.
pub const EXIT_NON_UNIFORM: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(Error::Parse(_) | Error::InvalidArgument(_)) => EXIT_CONFIG,
            CliError::Core(Error::Aliasing { .. }) => EXIT_ALIASING,
            CliError::Core(Error::NonUniformGrid { .. }) => EXIT_NON_UNIFORM,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "noonspec",
    version,
    about = "N00N-state two-photon excitation spectroscopy simulator"
)]
pub struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Bundled scenario (see `presets list`).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward-simulate spectra, interferogram and correlation trace.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Output directory (overrides the scenario's `outputs`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed (overrides the scenario's).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recover the spectrum from a `t_ps,g` trace CSV.
    Recover {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Taper: rect or hann.
        #[arg(long, default_value = "rect")]
        window: crate::recovery::Window,
        /// Heterodyne reference frequency, THz.
        #[arg(long)]
        downshift_thz: Option<f64>,
        /// Minimum feature prominence as a fraction of the folded maximum.
        #[arg(long, default_value_t = 0.05)]
        min_prominence: f64,
    },
    /// Spread of recovered peak height and center against trial count.
    NoiseStudy {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated pair counts per delay bin.
        #[arg(long, value_delimiter = ',', default_values_t = [1000u64, 3162, 10000, 31623, 100000])]
        trials: Vec<u64>,
        #[arg(long, default_value_t = 50)]
        repeats: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List or print bundled scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
    Show { name: String },
}
