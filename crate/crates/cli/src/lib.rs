//! Command-line front end for collective annealing experiments.
//!
//! The `cast` binary is a thin wrapper around [`execute`].

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{Document, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "cast", version, about = "Collective annealing experiments")]
pub struct Cli {
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Override a config key, e.g. `--set particles=200` or `--set params.mu=[0,0.5]`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration, optionally repeated.
    Run { config: PathBuf },
    /// Run several cooling strategies (`[[arm]]` sections) side by side.
    Compare { config: PathBuf },
    /// Full-factorial sweep over the `[params]` table.
    Sweep { plan: PathBuf },
    /// Mean-temperature decay against logarithmic and geometric references.
    DecayStudy { config: PathBuf },
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut overrides = Overrides { seed: cli.seed, set: Vec::new() };
    for raw in &cli.set {
        overrides.push_set(raw)?;
    }
    let path = match &cli.command {
        Command::Run { config } | Command::Compare { config } | Command::DecayStudy { config } => config,
        Command::Sweep { plan } => plan,
    };
    let mut doc = Document::load(path)?;
    doc.apply(&overrides)?;

    let dispatch = || match &cli.command {
        Command::Run { .. } => commands::cmd_run(&doc, &cli.out),
        Command::Compare { .. } => commands::cmd_compare(&doc, &cli.out),
        Command::Sweep { .. } => commands::cmd_sweep(&doc, &cli.out),
        Command::DecayStudy { .. } => commands::cmd_decay_study(&doc, &cli.out),
    };
    match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(dispatch),
        None => dispatch(),
    }
}
