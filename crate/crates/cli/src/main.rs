//! `rcm`: rates, phase diagrams, exact enumeration, sampling and validation
//! for the random cluster model on the complete graph.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rcm",
    version,
    about = "Random cluster model on the complete graph"
)]
struct Cli {
    /// `key = value` file supplying defaults; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Tabulate the rate function theta -> phi(theta, lambda, q).
    Rate(RateArgs),
    /// Phase diagram: lambda_c, theta*, theta_max and free energy on a grid.
    Phase(PhaseArgs),
    /// Exact enumeration of every configuration for small n.
    Exact(ExactArgs),
    /// Heat-bath Markov chain samples.
    Sample(SampleArgs),
    /// Tree saddle point diagnostics.
    Saddle(SaddleArgs),
    /// Run the acceptance suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RateArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub q: f64,
    /// Number of theta grid points, endpoints included.
    #[arg(long, default_value_t = rcm_core::rate::SUP_GRID_POINTS)]
    pub grid: usize,
    /// CSV destination; the phase point goes to `<stem>.phase.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_start: f64,
    #[arg(long, default_value_t = 5.0)]
    pub lambda_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_step: f64,
    /// Omit grid points that sit exactly at lambda_c instead of failing.
    #[arg(long)]
    pub skip_critical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub q: f64,
    /// Size thresholds r for B_r, L & B_r, |V_r| and N_r.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<usize>,
    /// Fractions eps for |V_eps n|, N_eps n and K_eps,2.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Allow n = 7 (2^21 configurations).
    #[arg(long)]
    pub long_run: bool,
    /// Also write `<stem>.finite_rate.csv` for this eps.
    #[arg(long)]
    pub finite_rate: Option<f64>,
    /// Also write `<stem>.uniqueness.json` for this eps.
    #[arg(long)]
    pub uniqueness: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Auto,
    Empty,
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, value_enum, default_value_t = InitArg::Auto)]
    pub init: InitArg,
    /// Wall-clock limit in seconds; records so far are kept.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// CSV destination; the summary goes to `<stem>.summary.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SaddleArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 200)]
    pub r: usize,
    /// Also report the discrete saddle at this n.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    pub level: LevelArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cmd = Cli::command();
    let argv = match config::expand(std::env::args().collect(), &cmd) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Cmd::Rate(a) => commands::rate(&a),
        Cmd::Phase(a) => commands::phase(&a),
        Cmd::Exact(a) => commands::exact(&a),
        Cmd::Sample(a) => commands::sample(&a),
        Cmd::Saddle(a) => commands::saddle(&a),
        Cmd::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
