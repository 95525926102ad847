//! `jetconn`: verification suites, geodesic sampling and pointwise inspection
//! of connections given by manifold specs.

mod commands;
mod parse;
mod report;
mod suites;

use std::panic;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::suites::Suite;

#[derive(Debug, Parser)]
#[command(name = "jetconn", version, about = "Affine connections as symmetry jets: checks, geodesics and inspection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run verification suites and report residuals against tolerances.
    Verify {
        /// Builtin name or path to a spec file.
        #[arg(long)]
        manifold: String,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Override every check tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Integration step for the flow checks.
        #[arg(long, default_value_t = jetconn::flows::DEFAULT_STEP)]
        h: f64,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        report: Option<String>,
        /// Record wall time per check (makes the report run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Sample a geodesic as CSV.
    Geodesic {
        #[arg(long)]
        manifold: String,
        /// Start point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Initial velocity, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = jetconn::flows::DEFAULT_STEP)]
        h: f64,
        /// CSV output path ("-" or absent for stdout).
        #[arg(long)]
        emit: Option<String>,
        /// Add the image of each sample under the geodesic symmetry at the start point.
        #[arg(long)]
        symmetry: bool,
        /// Largest number of data rows.
        #[arg(long, default_value_t = 101)]
        rows: usize,
    },
    /// Print the connection, torsion and curvature at a point, and optionally
    /// the affine extensions of a 1-jet.
    Inspect {
        #[arg(long)]
        manifold: String,
        /// Base point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Target point of the jet; defaults to the base point.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
        /// Linear part of the jet, rows separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
        /// Tolerance of the integrability verdict.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Outcome of a command: a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    Usage = 2,
}

fn run(cli: Cli) -> Status {
    match cli.command {
        Command::Verify { manifold, suite, tol, seed, h, report, timings } => {
            commands::verify(&manifold, suite, tol, seed, h, report.as_deref(), timings)
        }
        Command::Geodesic { manifold, from, dir, t, h, emit, symmetry, rows } => {
            commands::geodesic(&manifold, &from, &dir, t, h, emit.as_deref(), symmetry, rows)
        }
        Command::Inspect { manifold, at, to, xi, tol } => {
            commands::inspect(&manifold, &at, to.as_deref(), xi.as_deref(), tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { Status::Ok as u8 });
        }
    };
    panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    match panic::catch_unwind(|| run(cli)) {
        Ok(status) => ExitCode::from(status as u8),
        Err(_) => ExitCode::from(Status::Usage as u8),
    }
}
