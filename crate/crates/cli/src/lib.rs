//! The `lossforge` command line.
//!
//! Exit codes: 0 on success, 1 when a check fails or a run cannot finish,
//! 2 on usage errors and unreadable inputs.

mod experiments;
mod gradcheck;
mod options;
mod plot;
mod theory;

use std::ffi::OsString;
use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use options::{MNIST_DIR_ENV, RESULTS_DIR_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "lossforge",
    version,
    about = "Train and compare classification losses: gradient checks, identity checks, grids, noise sweeps and plots"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare analytic loss gradients with central finite differences
    Gradcheck(gradcheck::GradcheckArgs),
    /// Check the expectation, Cauchy-Schwarz and sigmoid-slope identities numerically
    VerifyTheory(theory::TheoryArgs),
    /// Train one model and write its learning curve
    Train(experiments::TrainArgs),
    /// Train every loss x depth cell and write one curve per cell
    Grid(experiments::GridArgs),
    /// Accuracy of a trained model under Gaussian input noise
    NoiseInput(experiments::NoiseInputArgs),
    /// Retrain with a fraction of training labels corrupted
    NoiseLabel(experiments::NoiseLabelArgs),
    /// Render curve or sweep CSVs as an SVG line chart
    Plot(plot::PlotArgs),
}

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable input; exit 2.
    Usage(String),
    /// A check failed or a run could not finish; exit 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Failed(msg) => f.write_str(msg),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gradcheck(args) => gradcheck::run(&args),
        Command::VerifyTheory(args) => theory::run(&args),
        Command::Train(args) => experiments::train(&args),
        Command::Grid(args) => experiments::grid(&args),
        Command::NoiseInput(args) => experiments::noise_input(&args),
        Command::NoiseLabel(args) => experiments::noise_label(&args),
        Command::Plot(args) => plot::run(&args),
    }
}

/// Parses `args` and runs the command, reporting errors on stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
