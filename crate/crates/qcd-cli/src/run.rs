//! Subcommand implementations and the parallel trial driver.

use std::fs::File;
use std::io::Write;

use rayon::prelude::*;

use qcd_core::bounds::{
    add_asymptotic_upper, add_slope, arl_lower_bound, classify_regime, pfa_upper_bound,
    threshold_for_pfa,
};
use qcd_core::distributions::gaussian_kl;
use qcd_core::simulator::{estimate_from_records, run_trial, MetricsEstimate, StreamPurpose};
use qcd_core::{
    AddBound, ChangePointPrior, DetectorKind, DivergencePair, ExperimentConfig, GaussianModel,
    RegimeClass, RunRecord,
};

use crate::output::{fmt17, write_csv, write_json, ConfigEcho, Row};
use crate::{CliError, Format, ModelArgs, Procedure, SimArgs};

/// Parallel ADD/PFA batch. Each trial derives its stream from its index, so
/// the records equal the serial ones for any worker count.
pub fn detection_records_parallel(
    config: &ExperimentConfig<GaussianModel>,
    workers: usize,
) -> Result<Vec<RunRecord>, CliError> {
    parallel_batch(config, workers, StreamPurpose::Detection)
}

/// Parallel ARL batch (no-change prior).
pub fn run_length_records_parallel(
    config: &ExperimentConfig<GaussianModel>,
    workers: usize,
) -> Result<Vec<RunRecord>, CliError> {
    let mut arl_config = config.clone();
    arl_config.prior = ChangePointPrior::NoChange;
    parallel_batch(&arl_config, workers, StreamPurpose::RunLength)
}

fn parallel_batch(
    config: &ExperimentConfig<GaussianModel>,
    workers: usize,
    purpose: StreamPurpose,
) -> Result<Vec<RunRecord>, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(pool.install(|| {
        (0..config.n_trials)
            .into_par_iter()
            .map(|i| run_trial(config, i, purpose))
            .collect()
    }))
}

fn divergences(model: &ModelArgs) -> Result<DivergencePair, CliError> {
    let f0 = GaussianModel::new(model.rho0)?;
    let f1 = GaussianModel::new(model.rho1)?;
    let fa = GaussianModel::new(model.rho_assumed)?;
    Ok(DivergencePair::new(gaussian_kl(&f1, &f0), gaussian_kl(&f1, &fa))?)
}

pub fn cmd_kl(model: &ModelArgs) -> Result<(), CliError> {
    let div = divergences(model)?;
    println!("d10 = {}", fmt17(div.d10()));
    println!("d11_tilde = {}", fmt17(div.d11_tilde()));
    println!("gap = {}", fmt17(div.gap()));
    println!("regime = {}", classify_regime(&div).name());
    Ok(())
}

pub fn cmd_bounds(model: &ModelArgs, alpha: f64, procedure: Procedure) -> Result<(), CliError> {
    let div = divergences(model)?;
    let theta_bar = 1.0 / model.p0;
    println!("regime = {}", classify_regime(&div).name());
    match add_slope(&div) {
        Ok(slope) => println!("add_slope = {}", fmt17(slope)),
        Err(_) => println!("add_slope = NaN"),
    }
    for kind in procedure.kinds() {
        let a = threshold_for_pfa(kind, alpha, theta_bar)?;
        println!("procedure = {}", kind.name());
        println!("  threshold = {}", fmt17(a));
        println!("  log_threshold = {}", fmt17(a.ln()));
        println!("  arl_lower_bound = {}", fmt17(arl_lower_bound(a)?));
        println!("  pfa_upper_bound = {}", fmt17(pfa_upper_bound(kind, a, theta_bar)?));
        match add_asymptotic_upper(kind, alpha, theta_bar, &div) {
            Ok(AddBound::Finite(v)) => {
                println!("  add_asymptotic_upper = {} (asymptotic guide)", fmt17(v));
            }
            Ok(AddBound::Infinite { asymptotic_only: false }) => {
                println!("  add_asymptotic_upper = inf");
            }
            Ok(AddBound::Infinite { asymptotic_only: true }) => {
                println!("  add_asymptotic_upper = inf (asymptotic-only)");
            }
            Err(_) => println!("  add_asymptotic_upper = NaN (degenerate gap)"),
        }
    }
    Ok(())
}

fn experiment_config(
    sim: &SimArgs,
    log_threshold: f64,
) -> Result<ExperimentConfig<GaussianModel>, CliError> {
    let config = ExperimentConfig {
        models: sim.model.triple()?,
        prior: sim.model.prior()?,
        kinds: sim.procedure.kinds(),
        log_threshold,
        n_trials: sim.trials,
        horizon: sim.horizon,
        master_seed: sim.seed,
    };
    config.validate()?;
    Ok(config)
}

/// The plug-in delay bound column for one row; NaN where the analysis does
/// not apply (vacuous PFA bound or zero gap), inf in the divergent regime.
fn bound_add_column(kind: DetectorKind, a: f64, theta_bar: f64, div: &DivergencePair) -> f64 {
    match classify_regime(div) {
        RegimeClass::Degenerate => f64::NAN,
        RegimeClass::InfiniteCusumAdd => f64::INFINITY,
        RegimeClass::FiniteAddBound => {
            let alpha = pfa_upper_bound(kind, a, theta_bar).expect("validated threshold");
            if alpha >= 1.0 {
                return f64::NAN;
            }
            match add_asymptotic_upper(kind, alpha, theta_bar, div) {
                Ok(AddBound::Finite(v)) => v,
                _ => f64::NAN,
            }
        }
    }
}

fn metrics_rows(
    sim: &SimArgs,
    log_threshold: f64,
    metrics: &std::collections::BTreeMap<DetectorKind, MetricsEstimate>,
    div: &DivergencePair,
) -> Vec<Row> {
    let a = log_threshold.exp();
    let theta_bar = 1.0 / sim.model.p0;
    let unpack = |e: &Option<qcd_core::Estimate>| match e {
        Some(e) => (e.mean, e.stderr),
        None => (f64::NAN, f64::NAN),
    };
    let mut rows = Vec::new();
    for (&kind, m) in metrics {
        let (add, add_stderr) = unpack(&m.add);
        let (pfa, pfa_stderr) = unpack(&m.pfa);
        let (arl, arl_stderr) = unpack(&m.arl);
        rows.push(Row {
            log_threshold,
            procedure: kind.name(),
            add,
            add_stderr,
            pfa,
            pfa_stderr,
            arl,
            arl_stderr,
            n_censored: m.n_censored,
            bound_add: bound_add_column(kind, a, theta_bar, div),
            bound_pfa: pfa_upper_bound(kind, a, theta_bar).expect("validated threshold"),
            bound_arl: arl_lower_bound(a).expect("validated threshold"),
        });
    }
    rows
}

/// Runs the full experiment at each grid threshold and assembles the output
/// rows. Trial streams depend only on the trial index (common random
/// numbers), so per-trial stopping times are monotone across the grid.
pub fn sweep_rows(sim: &SimArgs, grid: &[f64]) -> Result<Vec<Row>, CliError> {
    if grid.is_empty() {
        return Err(CliError::Usage("empty threshold grid".into()));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Usage("thresholds must be strictly increasing".into()));
    }
    let div = divergences(&sim.model)?;
    let mut rows = Vec::new();
    for &log_a in grid {
        let config = experiment_config(sim, log_a)?;
        let detection = detection_records_parallel(&config, sim.workers)?;
        let run_length = run_length_records_parallel(&config, sim.workers)?;
        let metrics = estimate_from_records(&config, &detection, Some(&run_length));
        rows.extend(metrics_rows(sim, log_a, &metrics, &div));
    }
    Ok(rows)
}

fn echo(sim: &SimArgs, thresholds: &[f64]) -> ConfigEcho {
    ConfigEcho {
        rho0: sim.model.rho0,
        rho1: sim.model.rho1,
        rho_assumed: sim.model.rho_assumed,
        p0: sim.model.p0,
        procedure: match sim.procedure {
            Procedure::Cusum => "cusum",
            Procedure::Sr => "sr",
            Procedure::Both => "both",
        },
        trials: sim.trials,
        horizon: sim.horizon,
        seed: sim.seed,
        log_thresholds: thresholds.to_vec(),
    }
}

fn emit(sim: &SimArgs, thresholds: &[f64], rows: &[Row]) -> Result<(), CliError> {
    let config = echo(sim, thresholds);
    match &sim.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_rows(file, sim.format, &config, rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_rows(stdout.lock(), sim.format, &config, rows)?;
        }
    }
    Ok(())
}

fn write_rows<W: Write>(
    w: W,
    format: Format,
    config: &ConfigEcho,
    rows: &[Row],
) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(w, rows)?,
        Format::Json => write_json(w, config, rows)?,
    }
    Ok(())
}

pub fn cmd_simulate(sim: &SimArgs, log_threshold: f64) -> Result<(), CliError> {
    let rows = sweep_rows(sim, &[log_threshold])?;
    emit(sim, &[log_threshold], &rows)
}

pub fn cmd_sweep(sim: &SimArgs, grid: &[f64]) -> Result<(), CliError> {
    let rows = sweep_rows(sim, grid)?;
    emit(sim, grid, &rows)
}
