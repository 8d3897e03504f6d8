//! Command-line front end for `qcd-core`.
//!
//! Subcommands: `kl` (divergences and regime), `bounds` (analytic bound
//! evaluation), `simulate` (one Monte Carlo experiment), `sweep` (threshold
//! grid reproducing the delay-vs-log-threshold curves), and `validate`
//! (self-check suite). Exit statuses: 0 success, 1 check failure, 2 usage
//! error, 3 I/O error.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcd_core::{ChangePointPrior, DetectorKind, GaussianModel, ModelTriple};

mod output;
mod run;
mod validate;

pub use output::{fmt17, write_csv, write_json, ConfigEcho, Row};
pub use run::{detection_records_parallel, run_length_records_parallel, sweep_rows};

/// Failure modes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments or parameter combinations (exit 2).
    Usage(String),
    /// A validation check failed (exit 1).
    Check(String),
    /// Output could not be written (exit 3).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Check(_) => ExitCode::from(1),
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl From<qcd_core::Error> for CliError {
    fn from(e: qcd_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qcd",
    about = "Quickest change detection with mismatched post-change models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Procedure {
    Cusum,
    Sr,
    Both,
}

impl Procedure {
    pub fn kinds(&self) -> Vec<DetectorKind> {
        match self {
            Procedure::Cusum => vec![DetectorKind::Cusum],
            Procedure::Sr => vec![DetectorKind::ShiryaevRoberts],
            Procedure::Both => DetectorKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Model parameters shared by every subcommand; defaults follow the
/// reference experiment (pre-change rho 0, post-change rho 0.5, prior 0.1).
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Pre-change correlation coefficient.
    #[arg(long, default_value_t = 0.0)]
    pub rho0: f64,
    /// True post-change correlation coefficient.
    #[arg(long, default_value_t = 0.5)]
    pub rho1: f64,
    /// Post-change correlation the detector assumes.
    #[arg(long, default_value_t = 0.5)]
    pub rho_assumed: f64,
    /// Geometric change-point prior parameter.
    #[arg(long, default_value_t = 0.1)]
    pub p0: f64,
}

impl ModelArgs {
    pub fn triple(&self) -> Result<ModelTriple<GaussianModel>, CliError> {
        Ok(ModelTriple::new(
            GaussianModel::new(self.rho0)?,
            GaussianModel::new(self.rho1)?,
            GaussianModel::new(self.rho_assumed)?,
        ))
    }

    pub fn prior(&self) -> Result<ChangePointPrior, CliError> {
        Ok(ChangePointPrior::geometric(self.p0)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Detection procedure(s) to run.
    #[arg(long, value_enum, default_value_t = Procedure::Both)]
    pub procedure: Procedure,
    /// Monte Carlo trials per batch.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Maximum samples per trial before censoring.
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
    /// Master seed; every trial derives its own stream from it.
    #[arg(long, required = true)]
    pub seed: u64,
    /// Worker threads (0 = rayon default). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the KL divergences, their gap, and the delay regime.
    Kl {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Evaluate the analytic ARL/PFA/ADD bounds at a PFA target.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        /// PFA target in (0, 1).
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Procedure::Both)]
        procedure: Procedure,
    },
    /// Run one Monte Carlo experiment at a single threshold.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// log A for the stopping rule.
        #[arg(long, default_value_t = 4.0)]
        log_threshold: f64,
    },
    /// Run a threshold sweep over a log A grid (start:stop:step).
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Grid as start:stop:step, e.g. 3:6:0.5.
        #[arg(long)]
        log_threshold_grid: String,
    },
    /// Run the self-validation suite; exit 0 iff every check passes.
    Validate {
        /// Master seed for all stochastic checks.
        #[arg(long, required = true)]
        seed: u64,
        /// Trials per stochastic check.
        #[arg(long, default_value_t = 4_000)]
        trials: u64,
    },
}

/// Parses the grid syntax `start:stop:step` into a strictly increasing list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(CliError::Usage(format!("grid must be start:stop:step, got {text}")));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("invalid grid number {s}")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step.is_nan() || start.is_nan() || stop.is_nan() || step <= 0.0 || start >= stop {
        return Err(CliError::Usage("grid requires start < stop and step > 0".into()));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let v = start + step * i as f64;
        if v > stop + 1e-9 {
            break;
        }
        grid.push(v);
        i += 1;
    }
    Ok(grid)
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Check(msg) => eprintln!("validation failed: {msg}"),
                CliError::Io(msg) => eprintln!("i/o error: {msg}"),
            }
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Kl { model } => run::cmd_kl(&model),
        Command::Bounds { model, alpha, procedure } => run::cmd_bounds(&model, alpha, procedure),
        Command::Simulate { sim, log_threshold } => run::cmd_simulate(&sim, log_threshold),
        Command::Sweep { sim, log_threshold_grid } => {
            let grid = parse_grid(&log_threshold_grid)?;
            run::cmd_sweep(&sim, &grid)
        }
        Command::Validate { seed, trials } => validate::cmd_validate(seed, trials),
    }
}
