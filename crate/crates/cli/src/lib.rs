//! Command-line front end: every subcommand is a pure function of a JSON run
//! configuration, its input files and the seed, and leaves a manifest next to
//! its outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "coinn", version, about = "Correlation-informed neural networks for two-phase pressure drop")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print only machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for restarts (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average points into per-experiment quality bins.
    Preprocess {
        /// Raw CSV, instead of the configured dataset.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long)]
        n_bins: Option<usize>,
    },
    /// Predict pressure gradients with a correlation or a saved model.
    Predict(commands::PredictArgs),
    /// Multi-start training of one architecture.
    Train,
    /// Train every (input set, hidden size) combination.
    Sweep,
    /// Per-experiment error of a saved model against the reference correlation.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
    },
    /// Pearson and Spearman matrices of measured and derived features.
    Analyze,
}

/// What a subcommand reports on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
}

/// Parse-free entry point: resolve the configuration, then run the command
/// on a pool of the requested size.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve_config(cli)?;
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| commands::dispatch(&cli.command, &cfg))
        }
        None => commands::dispatch(&cli.command, &cfg),
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.command) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Command::Predict(_)) => RunConfig::bare(0),
        (None, Command::Preprocess { input: Some(_), .. }) => RunConfig::bare(0),
        (None, _) => return Err(CliError::Config("--config is required for this command".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}
