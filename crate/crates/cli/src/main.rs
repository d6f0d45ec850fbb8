//! `pat`: batch front end for simulation, reconstruction, evaluation and
//! operator diagnostics.

mod commands;
mod config;
mod diagnose;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::ReconstructArgs;
use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pat", version, about = "Wavelet-vaguelette photoacoustic reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the phantom, clean and noisy data and a manifest.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct from a PGF1 data file.
    Reconstruct {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long, value_enum, default_value = "all")]
        method: Method,
        /// PGF1 image used to report relative errors.
        #[arg(short, long)]
        truth: Option<PathBuf>,
        /// Uniform threshold replacing the calibrated schedule.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo risk, three-estimator comparison and rate diagnostic.
    Evaluate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Wavelet/vaguelette images, Gram matrix and operator invariants.
    Diagnose {
        #[arg(short, long, default_value = "diagnostics")]
        out: PathBuf,
    },
    /// Print the default configuration.
    DefaultConfig,
}

/// Caps the global pool at `PAT_THREADS` workers.
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("PAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("PAT_THREADS={raw:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            for path in commands::simulate(&cfg, out.as_deref())? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Reconstruct {
            config,
            input,
            method,
            truth,
            threshold,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            commands::reconstruct(
                &cfg,
                &ReconstructArgs {
                    data: &input,
                    method,
                    truth: truth.as_deref(),
                    threshold,
                    out: out.as_deref(),
                },
            )
        }
        Command::Evaluate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            commands::evaluate(&cfg, out.as_deref())
        }
        Command::Diagnose { out } => diagnose::diagnose(&out),
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pat: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
