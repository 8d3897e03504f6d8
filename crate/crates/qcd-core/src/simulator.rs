//! Monte Carlo trial runner and metric estimators.
//!
//! Every trial is a pure function of `(master_seed, trial_index, purpose)`,
//! so results are identical for any worker count and scheduling order. The
//! serial drivers here produce the canonical record vectors; a parallel
//! front end may produce the same vectors by mapping [`run_trial`] over the
//! trial indices in any order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::sqrt;

use crate::detectors::{DetectorKind, DetectorState, StoppingOutcome, StoppingRule};
use crate::distributions::{BernoulliModel, ChangePoint, ChangePointPrior, ObservationModel};
use crate::error::{Error, Result};
use crate::likelihood::{log_ratio_step, ModelTriple};
use crate::rng::trial_rng;

/// Seed domain separator so that distinct batches never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    /// ADD/PFA batch with the configured prior.
    Detection = 0,
    /// ARL batch (no change ever occurs).
    RunLength = 1,
    /// KL Monte Carlo oracle draws.
    KlOracle = 2,
    /// Martingale verification draws.
    Martingale = 3,
}

/// Everything one Monte Carlo experiment needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig<M: ObservationModel> {
    pub models: ModelTriple<M>,
    pub prior: ChangePointPrior,
    pub kinds: Vec<DetectorKind>,
    pub log_threshold: f64,
    pub n_trials: u64,
    pub horizon: u64,
    pub master_seed: u64,
}

impl<M: ObservationModel + Clone> ExperimentConfig<M> {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::InvalidConfig("n_trials must be >= 1"));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be >= 1"));
        }
        if self.kinds.is_empty() {
            return Err(Error::InvalidConfig("at least one detector kind"));
        }
        if !self.log_threshold.is_finite() {
            return Err(Error::InvalidConfig("log_threshold must be finite"));
        }
        Ok(())
    }
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub trial_index: u64,
    pub theta: ChangePoint,
    pub taus: Vec<(DetectorKind, StoppingOutcome)>,
}

impl RunRecord {
    pub fn tau(&self, kind: DetectorKind) -> Option<StoppingOutcome> {
        self.taus.iter().find(|(k, _)| *k == kind).map(|(_, t)| *t)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// ADD/PFA/ARL point estimates for one detector kind. Conditional metrics
/// with no qualifying trials are `None`, never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsEstimate {
    pub add: Option<Estimate>,
    /// Set when censored trials were excluded from the delay average, making
    /// it a lower-bound estimate.
    pub add_is_lower_bound: bool,
    pub pfa: Option<Estimate>,
    pub arl: Option<Estimate>,
    pub arl_is_lower_bound: bool,
    pub n_detections: u64,
    pub n_false_alarms: u64,
    pub n_censored: u64,
    pub n_trials: u64,
}

/// Incremental mean/variance accumulator (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> Option<Estimate> {
        if self.n == 0 {
            return None;
        }
        let stderr = if self.n > 1 {
            sqrt(self.m2 / (self.n as f64 - 1.0) / self.n as f64)
        } else {
            0.0
        };
        Some(Estimate { mean: self.mean, stderr, n: self.n })
    }
}

/// Runs one trial: samples the change point and the observation stream,
/// feeds the mismatched log-ratio into every configured detector, and
/// records the stopping times. Deterministic in
/// `(master_seed, trial_index, purpose)`.
pub fn run_trial<M: ObservationModel + Clone>(
    config: &ExperimentConfig<M>,
    trial_index: u64,
    purpose: StreamPurpose,
) -> RunRecord {
    let mut rng = trial_rng(config.master_seed, trial_index, purpose as u64);
    let theta = config.prior.sample(&mut rng);
    let rule = StoppingRule::from_log_threshold(config.log_threshold);

    let mut states: Vec<DetectorState> =
        config.kinds.iter().map(|&k| DetectorState::new(k)).collect();
    let mut taus: Vec<(DetectorKind, StoppingOutcome)> =
        config.kinds.iter().map(|&k| (k, StoppingOutcome::Censored)).collect();
    let mut open = config.kinds.len();

    let mut history: Vec<M::Obs> = Vec::new();
    for n in 1..=config.horizon {
        let model = if theta.is_post_change(n) {
            &config.models.f1_true
        } else {
            &config.models.f0
        };
        let x = model.sample(&mut rng, &history);
        let z = log_ratio_step(&config.models, &x, &history).log_lambda_tilde;
        history.push(x);
        for (state, tau) in states.iter_mut().zip(taus.iter_mut()) {
            if tau.1 != StoppingOutcome::Censored {
                continue;
            }
            state
                .update(z)
                .expect("shipped models have strictly positive densities");
            if rule.triggered(state) {
                tau.1 = StoppingOutcome::At(n);
                open -= 1;
            }
        }
        if open == 0 {
            break;
        }
    }
    RunRecord { trial_index, theta, taus }
}

/// Serial ADD/PFA batch under the configured prior.
pub fn detection_records<M: ObservationModel + Clone>(
    config: &ExperimentConfig<M>,
) -> Vec<RunRecord> {
    (0..config.n_trials)
        .map(|i| run_trial(config, i, StreamPurpose::Detection))
        .collect()
}

/// Serial ARL batch: same configuration with the no-change prior.
pub fn run_length_records<M: ObservationModel + Clone>(
    config: &ExperimentConfig<M>,
) -> Vec<RunRecord> {
    let mut arl_config = config.clone();
    arl_config.prior = ChangePointPrior::NoChange;
    (0..config.n_trials)
        .map(|i| run_trial(&arl_config, i, StreamPurpose::RunLength))
        .collect()
}

/// Aggregates trial records into per-kind metric estimates.
///
/// ADD and PFA come from `detection`; ARL comes from `run_length` when
/// supplied. False alarm means an uncensored stop strictly before the change
/// point; delays average `tau - theta` over uncensored trials with
/// `tau >= theta`.
pub fn estimate_from_records<M: ObservationModel + Clone>(
    config: &ExperimentConfig<M>,
    detection: &[RunRecord],
    run_length: Option<&[RunRecord]>,
) -> BTreeMap<DetectorKind, MetricsEstimate> {
    let mut out = BTreeMap::new();
    for &kind in &config.kinds {
        let mut add = Accumulator::default();
        let mut pfa = Accumulator::default();
        let mut n_detections = 0;
        let mut n_false_alarms = 0;
        let mut n_censored = 0;
        for rec in detection {
            let Some(tau) = rec.tau(kind) else { continue };
            match tau {
                StoppingOutcome::Censored => {
                    n_censored += 1;
                    pfa.push(0.0);
                }
                StoppingOutcome::At(n) => match rec.theta {
                    ChangePoint::At(k) if n >= k => {
                        n_detections += 1;
                        add.push((n - k) as f64);
                        pfa.push(0.0);
                    }
                    ChangePoint::At(_) => {
                        n_false_alarms += 1;
                        pfa.push(1.0);
                    }
                    // No change ever: every stop precedes it.
                    ChangePoint::Never => {
                        n_false_alarms += 1;
                        pfa.push(1.0);
                    }
                },
            }
        }

        let mut arl = Accumulator::default();
        let mut arl_censored = 0u64;
        if let Some(run_length) = run_length {
            for rec in run_length {
                match rec.tau(kind) {
                    Some(StoppingOutcome::At(n)) => arl.push(n as f64),
                    Some(StoppingOutcome::Censored) => arl_censored += 1,
                    None => {}
                }
            }
        }

        out.insert(
            kind,
            MetricsEstimate {
                add: add.estimate(),
                add_is_lower_bound: n_censored > 0,
                pfa: pfa.estimate(),
                arl: arl.estimate(),
                arl_is_lower_bound: arl_censored > 0,
                n_detections,
                n_false_alarms,
                n_censored,
                n_trials: detection.len() as u64,
            },
        );
    }
    out
}

/// Runs both batches serially and aggregates. With a `NoChange` prior the
/// detection batch already is a run-length batch, so only one batch runs.
pub fn estimate_metrics<M: ObservationModel + Clone>(
    config: &ExperimentConfig<M>,
) -> Result<BTreeMap<DetectorKind, MetricsEstimate>> {
    config.validate()?;
    let detection = detection_records(config);
    if config.prior == ChangePointPrior::NoChange {
        let det = detection.clone();
        return Ok(estimate_from_records(config, &detection, Some(&det)));
    }
    let run_length = run_length_records(config);
    Ok(estimate_from_records(config, &detection, Some(&run_length)))
}

/// Simulates the Shiryaev-Roberts statistic under pure pre-change sampling
/// and returns mean and standard error of `S_n - n`, which is zero in
/// expectation by the martingale property.
pub fn martingale_check<M: ObservationModel>(
    f0: &M,
    f1_assumed: &M,
    n: u64,
    n_trials: u64,
    seed: u64,
) -> (f64, f64) {
    assert!(n >= 1);
    assert!(n_trials >= 1000, "too few trials for a stable estimate");
    let mut acc = Accumulator::default();
    for trial in 0..n_trials {
        let mut rng = trial_rng(seed, trial, StreamPurpose::Martingale as u64);
        // Linear domain is safe at the modest n used for this check.
        let mut s = 0.0;
        for _ in 0..n {
            let x = f0.sample(&mut rng, &[]);
            let lr = libm::exp(f1_assumed.log_density(&x, &[]) - f0.log_density(&x, &[]));
            s = (1.0 + s) * lr;
        }
        acc.push(s - n as f64);
    }
    let est = acc.estimate().expect("n_trials >= 1000");
    (est.mean, est.stderr)
}

/// Exact `E[S_n] - n` under the pre-change Bernoulli measure, by exhaustive
/// enumeration of all 2^n observation sequences. The statistic is evaluated
/// from its definition (sum over candidate change times of likelihood-ratio
/// products), independent of the recursive update.
pub fn bernoulli_sr_mean_exact(f0: &BernoulliModel, f1_assumed: &BernoulliModel, n: u32) -> f64 {
    assert!((1..=20).contains(&n), "enumeration is 2^n");
    let ratio = |x: bool| {
        libm::exp(f1_assumed.log_density(&x, &[]) - f0.log_density(&x, &[]))
    };
    let prob = |x: bool| if x { f0.p() } else { 1.0 - f0.p() };
    let mut expectation = 0.0;
    for bits in 0u32..(1 << n) {
        let xs: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let p_seq: f64 = xs.iter().map(|&x| prob(x)).product();
        let mut s = 0.0;
        for k in 0..n as usize {
            s += xs[k..].iter().map(|&x| ratio(x)).product::<f64>();
        }
        expectation += p_seq * s;
    }
    expectation - n as f64
}

/// One sweep point: delay estimate for a detector kind at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub log_threshold: f64,
    pub kind: DetectorKind,
    pub add: Option<Estimate>,
    pub n_censored: u64,
}

/// Estimates ADD at each threshold of a strictly increasing grid. Trials at
/// the same index reuse the same random stream across thresholds (common
/// random numbers), so per-trial stopping times are monotone in the
/// threshold.
pub fn add_vs_log_threshold_sweep<M: ObservationModel + Clone>(
    base: &ExperimentConfig<M>,
    log_thresholds: &[f64],
) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    if log_thresholds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !log_thresholds.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig("thresholds must be strictly increasing"));
    }
    let mut out = Vec::new();
    for &log_a in log_thresholds {
        let mut config = base.clone();
        config.log_threshold = log_a;
        let detection = detection_records(&config);
        let metrics = estimate_from_records(&config, &detection, None);
        for (&kind, m) in &metrics {
            out.push(SweepPoint {
                log_threshold: log_a,
                kind,
                add: m.add,
                n_censored: m.n_censored,
            });
        }
    }
    Ok(out)
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GaussianModel;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn bernoulli(p: f64) -> BernoulliModel {
        BernoulliModel::new(p).unwrap()
    }

    #[test]
    fn matched_no_change_bernoulli_censors() {
        // f0 = f1 = assumed: log ratio is identically 0, CUSUM stays at 0.
        let m = bernoulli(0.5);
        let config = ExperimentConfig {
            models: ModelTriple::new(m, m, m),
            prior: ChangePointPrior::NoChange,
            kinds: vec![DetectorKind::Cusum],
            log_threshold: libm::log(2.0),
            n_trials: 1,
            horizon: 100,
            master_seed: 1,
        };
        let rec = run_trial(&config, 0, StreamPurpose::Detection);
        assert_eq!(rec.tau(DetectorKind::Cusum), Some(StoppingOutcome::Censored));
    }

    #[test]
    fn sure_change_with_huge_drift_stops_immediately() {
        let config = ExperimentConfig {
            models: ModelTriple::matched(bernoulli(0.01), bernoulli(0.99)),
            prior: ChangePointPrior::geometric(1.0).unwrap(),
            kinds: vec![DetectorKind::Cusum, DetectorKind::ShiryaevRoberts],
            log_threshold: 0.1,
            n_trials: 1,
            horizon: 100,
            master_seed: 2,
        };
        // log ratio is log(99) ~ 4.6 for a success, and theta = 1 surely, but
        // a failure draw gives log(1/99); average over a few trials instead.
        let mut stopped_at_one = 0;
        for i in 0..20 {
            let rec = run_trial(&config, i, StreamPurpose::Detection);
            if rec.tau(DetectorKind::Cusum) == Some(StoppingOutcome::At(1)) {
                stopped_at_one += 1;
            }
        }
        assert!(stopped_at_one >= 19);
    }

    #[test]
    fn trials_are_deterministic() {
        let config = ExperimentConfig {
            models: ModelTriple::new(
                GaussianModel::new(0.0).unwrap(),
                GaussianModel::new(0.5).unwrap(),
                GaussianModel::new(0.3).unwrap(),
            ),
            prior: ChangePointPrior::geometric(0.1).unwrap(),
            kinds: DetectorKind::ALL.to_vec(),
            log_threshold: 3.0,
            n_trials: 10,
            horizon: 10_000,
            master_seed: 42,
        };
        let a = detection_records(&config);
        let b = detection_records(&config);
        assert_eq!(a, b);
    }

    #[test]
    fn sr_deterministic_run_length() {
        // f0 = f1 = assumed: S_n = n, so tau = 6 at A = 5.5 on every trial.
        let m = bernoulli(0.5);
        let config = ExperimentConfig {
            models: ModelTriple::new(m, m, m),
            prior: ChangePointPrior::NoChange,
            kinds: vec![DetectorKind::ShiryaevRoberts],
            log_threshold: libm::log(5.5),
            n_trials: 50,
            horizon: 100,
            master_seed: 3,
        };
        let metrics = estimate_metrics(&config).unwrap();
        let arl = metrics[&DetectorKind::ShiryaevRoberts].arl.unwrap();
        assert_relative_eq!(arl.mean, 6.0, epsilon = 1e-12);
        assert_eq!(arl.stderr, 0.0);
    }

    #[test]
    fn empty_metrics_are_unavailable_not_zero() {
        let m = bernoulli(0.5);
        let config = ExperimentConfig {
            models: ModelTriple::new(m, m, m),
            prior: ChangePointPrior::NoChange,
            kinds: vec![DetectorKind::Cusum],
            log_threshold: libm::log(2.0),
            n_trials: 5,
            horizon: 50,
            master_seed: 4,
        };
        let metrics = estimate_metrics(&config).unwrap();
        let m = &metrics[&DetectorKind::Cusum];
        assert!(m.add.is_none());
        assert!(m.arl.is_none());
        assert!(m.arl_is_lower_bound);
        assert_eq!(m.n_censored, 5);
    }

    #[test]
    fn martingale_matched_model_is_exact() {
        let m = bernoulli(0.5);
        let (mean, stderr) = martingale_check(&m, &m, 20, 1000, 5);
        assert_relative_eq!(mean, 0.0, epsilon = 1e-12);
        assert_relative_eq!(stderr, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bernoulli_enumeration_is_zero_mean() {
        let diff = bernoulli_sr_mean_exact(&bernoulli(0.5), &bernoulli(0.8), 10);
        assert!(diff.abs() < 1e-10, "E[S_10] - 10 = {diff}");
        let diff = bernoulli_sr_mean_exact(&bernoulli(0.3), &bernoulli(0.6), 8);
        assert!(diff.abs() < 1e-10, "E[S_8] - 8 = {diff}");
    }

    #[test]
    fn fit_slope_examples() {
        let (s, i) = fit_slope(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-12);
        assert_relative_eq!(i, 0.0, epsilon = 1e-12);

        let (s, i) = fit_slope(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        assert_relative_eq!(s, 0.0, epsilon = 1e-12);
        assert_relative_eq!(i, 1.0, epsilon = 1e-12);

        let (s, i) = fit_slope(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.1)]).unwrap();
        assert_relative_eq!(s, 1.05, epsilon = 1e-6);
        assert_relative_eq!(i, -1.0 / 60.0, epsilon = 1e-6);

        assert!(fit_slope(&[(1.0, 1.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let m = bernoulli(0.5);
        let config = ExperimentConfig {
            models: ModelTriple::new(m, m, m),
            prior: ChangePointPrior::NoChange,
            kinds: vec![DetectorKind::Cusum],
            log_threshold: 1.0,
            n_trials: 1,
            horizon: 10,
            master_seed: 0,
        };
        assert!(add_vs_log_threshold_sweep(&config, &[]).is_err());
        assert!(add_vs_log_threshold_sweep(&config, &[2.0, 1.0]).is_err());
        assert!(add_vs_log_threshold_sweep(&config, &[1.0, 1.0]).is_err());
    }
}
