mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Invalid(String),
    /// The computation or the file system failed: exit code 3.
    Runtime(String),
    /// `validate` found failing criteria: exit code 1.
    Failed(String),
}

impl From<spinwalk::Error> for CliError {
    fn from(e: spinwalk::Error) -> Self {
        if e.is_invalid_input() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SPINWALK_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Invalid(format!("SPINWALK_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run() -> Result<(), CliError> {
    let argv = config::expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with exit 0; usage errors exit 2.
            e.exit();
        }
    };
    configure_threads()?;
    match cli.command {
        Command::Density(a) => commands::density(&a),
        Command::Observables(a) => commands::observables(&a),
        Command::Entropy(a) => commands::entropy(&a),
        Command::Qrw(a) => commands::qrw(&a),
        Command::Validate(a) => commands::validate(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("spinwalk: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("spinwalk: invalid input: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("spinwalk: {msg}");
            ExitCode::from(3)
        }
    }
}
