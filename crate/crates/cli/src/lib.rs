//! Batch front end: verification suites, convergence experiments and Fourier
//! profiles driven by TOML spec files.
//!
//! Exit codes: `0` success, `1` failed check or infeasible operator, `2` usage
//! or parse error.

pub mod commands;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "waveops",
    version,
    about = "Averaged wave operator experiments on atomic measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite for a spec, or a built-in target.
    Verify(VerifyArgs),
    /// Run a convergence experiment and write traces plus a manifest.
    Converge(ConvergeArgs),
    /// Write the Fourier profile and Wiener averages of a measure.
    Fourier(FourierArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    pub spec: Option<PathBuf>,
    /// Built-in target: `paper-examples`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Directory for `verify_report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `tolerances.identity`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    pub spec: Option<PathBuf>,
    /// Built-in measure: `uniform8`, `cantor8` or `riesz-demo`.
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest frequency; overrides `fourier.n_max`.
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Verify(a) => commands::cmd_verify(&a),
        Command::Converge(a) => commands::cmd_converge(&a),
        Command::Fourier(a) => commands::cmd_fourier(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
