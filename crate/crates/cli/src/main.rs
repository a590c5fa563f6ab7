//! `opuc`: reproducible experiments on zeros of random OPUC combinations.
//!
//! Exit status is 0 on success, 2 for invalid input, 3 for numerical
//! failure and 1 when the artifact cannot be written.

mod config;
mod output;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Command, RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl From<opuc_zeros::Error> for CliError {
    fn from(e: opuc_zeros::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "opuc",
    version,
    about = "Zeros of random OPUC combinations: intensities, expected counts, Monte Carlo"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    #[command(flatten)]
    settings: Settings,

    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, env = "OPUC_THREADS")]
    threads: Option<usize>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let settings = match &cli.config {
        Some(path) => cli.settings.over(Settings::from_file(path)?),
        None => cli.settings,
    };
    let config = RunConfig::resolve(cli.command, settings)?;
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let artifact = run::run(&config)?;
    match &config.output {
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(artifact.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("opuc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
