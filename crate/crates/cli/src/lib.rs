//! `nwh` command-line driver.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 a checked
//! inequality failed beyond its tolerance, 3 numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use nwh_core::{FieldError, HarnackError, ParamError, SolverError, WaveError};

mod commands;
pub mod config;
mod report;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use report::Check;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Harnack(#[from] HarnackError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write json: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Solver(
                SolverError::PositivityLost { .. } | SolverError::NonFiniteState { .. } | SolverError::NotConverged { .. },
            )
            | Self::Harnack(HarnackError::Field(FieldError::NonPositiveSample { .. }))
            | Self::Wave(WaveError::NonFiniteState { .. } | WaveError::FrontHitBoundaryWindow { .. }) => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nwh", version, about = "Simulate f_t = Δf + af - bf^3 and check gradient estimates on the output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long)]
    pub n: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check admissibility of (alpha, beta, gamma) and report the branch
    Validate(ParamArgs),
    /// Tabulate the time gauge: t, value, derivative, ode_residual
    Gauge {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        steps: usize,
        /// Output file (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the equation and write snapshot files
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate H on every snapshot and report violations
    Certify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the two-point Harnack bound on random and adversarial queries
    Classical {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0.1)]
        min_gap: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Tolerance on log f(x2,t2) - log f(x1,t1) - log(bound)
        #[arg(long, default_value_t = 1e-6)]
        log_tol: f64,
    },
    /// Shoot a traveling-wave profile and check the speed and gradient bounds
    WaveProfile {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = 40.0)]
        half_width: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value = "nwh-out")]
        out_dir: PathBuf,
    },
    /// Measure the front speed of a 1D run and check both wave bounds
    WaveSpeed {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        level: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Relax to a steady state and compare with the constant sqrt(a/b)
    Steady {
        #[arg(long)]
        config: PathBuf,
        /// Stop once max |f_t| falls below this
        #[arg(long, default_value_t = 1e-9)]
        residual_tol: f64,
        #[arg(long, default_value_t = 40.0)]
        t_max: f64,
        /// Allowed max deviation from sqrt(a/b)
        #[arg(long, default_value_t = 1e-6)]
        deviation_tol: f64,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate(p) => commands::validate(&p),
        Command::Gauge { params, t0, t1, steps, out } => commands::gauge(&params, t0, t1, steps, out.as_deref()),
        Command::Simulate { config } => commands::simulate(&config),
        Command::Certify { config } => commands::certify(&config),
        Command::Classical { config, queries, min_gap, seed, log_tol } => {
            commands::classical(&config, queries, min_gap, seed, log_tol)
        }
        Command::WaveProfile { a, b, eta, half_width, tol, out_dir } => {
            commands::wave_profile(a, b, eta, half_width, tol, &out_dir)
        }
        Command::WaveSpeed { config, level, tol } => commands::wave_speed(&config, level, tol),
        Command::Steady { config, residual_tol, t_max, deviation_tol } => {
            commands::steady(&config, residual_tol, t_max, deviation_tol)
        }
    };
    match result {
        Ok(checks) => {
            if checks.iter().all(|c| c.pass) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
