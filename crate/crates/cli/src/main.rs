//! `gridres`: runs the grid resilience engines on scenario files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridres_core::rng::DEFAULT_SEED;
use gridres_core::Error;
use serde::Serialize;

/// Exit status for command-line usage errors (BSD `EX_USAGE`).
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "gridres", version, about = "Grid resilience simulations")]
struct Cli {
    /// Print errors to stderr as JSON objects.
    #[arg(long, global = true)]
    errors_json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Input scenario (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a frequency disturbance; writes trace and metrics.
    Frequency {
        #[command(flatten)]
        io: Io,
        /// Encoding of the trace.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the TSO-DSO exchanges of a coordination scenario.
    Coordinate {
        #[command(flatten)]
        io: Io,
    },
    /// Solve a fault and simulate breaker operation.
    Protection {
        #[command(flatten)]
        io: Io,
    },
    /// Run a black-start restoration, or a Monte Carlo study with `--p`.
    Blackstart {
        #[command(flatten)]
        io: Io,
        /// Battery availability per communication station.
        #[arg(long, requires = "radius_km")]
        p: Option<f64>,
        /// Cell radius for every station (km).
        #[arg(long, requires = "p")]
        radius_km: Option<f64>,
        /// Monte Carlo runs.
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, env = "GRIDRES_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Encoding of the single-run timeline.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Resilience metrics for a frequency trace or a restoration timeline.
    Metrics(commands::MetricsArgs),
    /// Check a scenario file and list every violation.
    Validate {
        path: PathBuf,
        /// Schema to check against; detected from the top-level keys if
        /// omitted.
        #[arg(long, value_enum)]
        kind: Option<commands::Kind>,
    },
    /// Write the bundled benchmark scenarios as JSON files.
    ExportBenchmarks {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<gridres_core::Violation>,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput { .. } => "invalid_input",
        Error::Validation(_) => "validation",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        _ => "simulation",
    }
}

fn report(e: &Error, json: bool) -> ExitCode {
    if json {
        let violations = match e {
            Error::Validation(v) => v.clone(),
            Error::InvalidInput { field, message } => vec![gridres_core::Violation::new(field, message)],
            _ => Vec::new(),
        };
        let r = ErrorReport { error: error_kind(e), message: e.to_string(), violations };
        eprintln!("{}", serde_json::to_string(&r).expect("error report serializes"));
    } else {
        eprintln!("gridres: {e}");
    }
    ExitCode::from(if e.is_validation() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Frequency { io, format } => commands::frequency(&io, format),
        Command::Coordinate { io } => commands::coordinate(&io),
        Command::Protection { io } => commands::protection(&io),
        Command::Blackstart { io, p, radius_km, runs, seed, format } => match (p, radius_km) {
            (Some(p), Some(r)) => commands::monte_carlo(&io, p, r, runs, seed),
            _ => commands::blackstart(&io, seed, format),
        },
        Command::Metrics(args) => commands::metrics(&args),
        Command::Validate { path, kind } => commands::validate(&path, kind),
        Command::ExportBenchmarks { out } => commands::export_benchmarks(&out),
    };
    match result {
        Ok(code) => code,
        Err(e) => report(&e, cli.errors_json),
    }
}
