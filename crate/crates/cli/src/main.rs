//! `ccp`: waiting-time distributions for the generalized coupon collector
//! problem, with an exact-rational backend that verifies every identity to
//! equality and a float backend with cancellation diagnostics.

mod commands;
mod output;
mod popfile;
mod verify;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_rational::BigRational;

use commands::{
    AlphaArgs, BackendArg, CompareArgs, DistArgs, EtaArgs, ExpectationArgs, Measure, PowersumArgs,
    SimulateArgs, VerifyArgs,
};
use output::{Format, Output};

#[derive(Debug)]
pub enum CliError {
    Core(ccp_core::Error),
    Io { path: String, message: String },
    Json { path: String, message: String },
    Usage(String),
}

impl From<ccp_core::Error> for CliError {
    fn from(e: ccp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "IoError",
            CliError::Json { .. } => "ParseError",
            CliError::Usage(_) => "UsageError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            CliError::Json { path, message } => write!(f, "cannot parse {path}: {message}"),
            CliError::Usage(message) => write!(f, "{message}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ccp",
    version,
    about = "Coupon collector waiting-time distributions over exact or float arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probability of completing the collection exactly at trial k
    Pdf(DistArgs),
    /// Probability of completing the collection within k trials
    Cdf(DistArgs),
    /// Probability that more than k trials are needed
    Ccdf(DistArgs),
    /// Expected number of trials to complete the collection
    Expectation(ExpectationArgs),
    /// Decomposition weight table for one exponent
    Alpha(AlphaArgs),
    /// Coefficients reducing a size-j power sum to the small sums
    Eta(EtaArgs),
    /// Sum of P_J^k over all subsets of one size
    Powersum(PowersumArgs),
    /// Replay the identity suites against the brute-force oracle
    Verify(VerifyArgs),
    /// Monte Carlo simulation of the collection process
    Simulate(SimulateArgs),
    /// Compare brute-force and fast power-sum evaluation
    Compare(CompareArgs),
}

impl Command {
    fn format(&self) -> Format {
        match self {
            Command::Pdf(a) | Command::Cdf(a) | Command::Ccdf(a) => a.render.format,
            Command::Expectation(a) => a.render.format,
            Command::Alpha(a) => a.render.format,
            Command::Eta(a) => a.render.format,
            Command::Powersum(a) => a.render.format,
            Command::Verify(a) => a.format,
            Command::Simulate(a) => a.format,
            Command::Compare(a) => a.render.format,
        }
    }
}

/// Runs the split-by-backend body of a command.
macro_rules! with_backend {
    ($backend:expr, $ty:ident => $body:expr) => {
        match $backend {
            BackendArg::Exact => {
                type $ty = BigRational;
                $body
            }
            BackendArg::Float => {
                type $ty = f64;
                $body
            }
        }
    };
}

fn run(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Pdf(args) => {
            with_backend!(args.render.backend, S => commands::dist::<S>(args, Measure::Pdf))
        }
        Command::Cdf(args) => {
            with_backend!(args.render.backend, S => commands::dist::<S>(args, Measure::Cdf))
        }
        Command::Ccdf(args) => {
            with_backend!(args.render.backend, S => commands::dist::<S>(args, Measure::Ccdf))
        }
        Command::Expectation(args) => {
            with_backend!(args.render.backend, S => commands::expectation_cmd::<S>(args))
        }
        Command::Alpha(args) => {
            with_backend!(args.render.backend, S => commands::alpha::<S>(args))
        }
        Command::Eta(args) => {
            with_backend!(args.render.backend, S => commands::eta::<S>(args))
        }
        Command::Powersum(args) => {
            with_backend!(args.render.backend, S => commands::powersum::<S>(args))
        }
        Command::Verify(args) => commands::verify(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Compare(args) => {
            with_backend!(args.render.backend, S => commands::compare::<S>(args))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let format = cli.command.format();
    match run(&cli.command) {
        Ok(out) => {
            for warning in &out.warnings {
                eprintln!("warning: {warning}");
            }
            for note in &out.notes {
                eprintln!("{note}");
            }
            print!("{}", out.render(format));
            ExitCode::from(out.exit)
        }
        Err(error) => {
            match format {
                Format::Json => {
                    let payload = serde_json::json!({
                        "error": { "code": error.code(), "message": error.to_string() }
                    });
                    eprintln!("{payload}");
                }
                Format::Csv => eprintln!("error: {error}"),
            }
            ExitCode::from(1)
        }
    }
}
