//! Command-line front end: loads a problem file, runs one command, writes
//! CSV files and `summary.txt` into the output directory.

mod commands;
pub mod csv;
pub mod summary;

use crate::error::Error;
use clap::{Parser, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

pub use summary::{Summary, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    SolveGame,
    SolveLimit,
    Convergence,
    Gap,
    VerifyEquilibrium,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::SolveGame => "solve-game",
            Command::SolveLimit => "solve-limit",
            Command::Convergence => "convergence",
            Command::Gap => "gap",
            Command::VerifyEquilibrium => "verify-equilibrium",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ticlq", version, about = "Equilibria of time-inconsistent LQ control problems")]
pub struct RunConfig {
    /// Problem definition (TOML)
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Number of players (uniform partition)
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Segment counts for the convergence study
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub n_list: Vec<usize>,
    /// Fine integration step
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Fixed-point tolerance of the limit solver
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Initial state, comma separated (defaults to all ones)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Start time for `gap`
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Re-optimization time for `gap`
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "ticlq-out")]
    pub out: PathBuf,
    /// Anchor intervals of the limit solver
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    /// Limit-solver start: zero, lyapunov or game-solution
    #[arg(long, default_value = "game-solution")]
    pub init: String,
    /// Random deviations per player
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Sample density of the assumption check
    #[arg(long, default_value_t = 11)]
    pub density: usize,
}

/// Exit status for an error: 2 for input problems, 3 for game-solver
/// failures, 4 for a limit solve that did not converge.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => 4,
        Error::RiccatiDivergence { .. }
        | Error::ControlWeightSingular { .. }
        | Error::Divergence { .. }
        | Error::IncompatibleSampling(_)
        | Error::InsufficientSamples { .. }
        | Error::AssumptionViolated(_) => 3,
        _ => 2,
    }
}

/// Executes a parsed configuration and returns its summary.
pub fn execute(config: &RunConfig) -> crate::error::Result<Summary> {
    if !(config.step > 0.0) || !(config.tol > 0.0) || config.n == 0 || config.max_iter == 0 || config.trials == 0 {
        return Err(Error::InvalidArgument(
            "step, tol, n, max-iter and trials must be positive".into(),
        ));
    }
    std::fs::create_dir_all(&config.out)?;
    let mut summary = commands::run(config)?;
    summary.insert("command", config.command.name());
    std::fs::write(config.out.join("summary.txt"), summary.render())?;
    Ok(summary)
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    match execute(&config) {
        Ok(summary) => {
            print!("{}", summary.render());
            let elapsed = started.elapsed().as_secs_f64();
            eprintln!("elapsed {elapsed:.3} s");
            let _ = std::fs::write(config.out.join("timing.txt"), format!("{elapsed:.6}\n"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
