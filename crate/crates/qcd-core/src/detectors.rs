//! CUSUM and Shiryaev-Roberts statistics as log-domain state machines.
//!
//! The linear-domain recursions are
//!   C_{n+1} = max(1, C_n) * lambda_{n+1},  C_0 = 0
//!   S_{n+1} = (1 + S_n)  * lambda_{n+1},   S_0 = 0
//! and are carried here as `log_stat`, initialized to -inf (log 0). The
//! CUSUM update becomes `max(0, log_stat) + z`; the SR update becomes
//! `log1p_exp(log_stat) + z` with an overflow-safe `log(1 + e^z)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Which test statistic a detector runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectorKind {
    Cusum,
    ShiryaevRoberts,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 2] = [DetectorKind::Cusum, DetectorKind::ShiryaevRoberts];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Cusum => "cusum",
            DetectorKind::ShiryaevRoberts => "sr",
        }
    }
}

/// Running log-domain statistic plus step counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorState {
    kind: DetectorKind,
    log_stat: f64,
    n: u64,
}

/// Overflow-safe log(1 + e^z); maps -inf to 0.
pub fn log1p_exp(z: f64) -> f64 {
    if z <= 0.0 {
        libm::log1p(libm::exp(z))
    } else {
        z + libm::log1p(libm::exp(-z))
    }
}

impl DetectorState {
    /// Fresh statistic: log_stat = -inf encodes C_0 = S_0 = 0.
    pub fn new(kind: DetectorKind) -> Self {
        Self { kind, log_stat: f64::NEG_INFINITY, n: 0 }
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn log_stat(&self) -> f64 {
        self.log_stat
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Advances the statistic by one observation's log-likelihood ratio.
    pub fn update(&mut self, log_lambda_tilde: f64) -> Result<()> {
        if !log_lambda_tilde.is_finite() {
            return Err(Error::NonFiniteLogRatio(log_lambda_tilde));
        }
        self.log_stat = match self.kind {
            // max(0, -inf) = 0, so the first step yields C_1 = lambda_1.
            DetectorKind::Cusum => self.log_stat.max(0.0) + log_lambda_tilde,
            DetectorKind::ShiryaevRoberts => log1p_exp(self.log_stat) + log_lambda_tilde,
        };
        self.n += 1;
        Ok(())
    }
}

/// Threshold A, stored as log A; the detector stops when log_stat >= log A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub log_threshold: f64,
}

impl StoppingRule {
    pub fn from_log_threshold(log_threshold: f64) -> Self {
        Self { log_threshold }
    }

    pub fn triggered(&self, state: &DetectorState) -> bool {
        state.log_stat >= self.log_threshold
    }
}

/// Stopping time of one run, with explicit censoring at the horizon in place
/// of tau = infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingOutcome {
    /// Stopped at 1-based sample index n.
    At(u64),
    /// No crossing within the horizon.
    Censored,
}

impl StoppingOutcome {
    pub fn time(&self) -> Option<u64> {
        match self {
            StoppingOutcome::At(n) => Some(*n),
            StoppingOutcome::Censored => None,
        }
    }
}

/// Definitional oracle: evaluates the statistic directly from the defining
/// max / sum over candidate change times, independent of the recursion.
///
/// CUSUM: max over k of sum_{i=k..n} log_ratios[i]. SR: log-sum-exp of the
/// same partial sums.
pub fn brute_force_stat(kind: DetectorKind, log_ratios: &[f64]) -> Result<f64> {
    if log_ratios.is_empty() {
        return Err(Error::EmptyInput);
    }
    // Suffix sums: tail[k] = sum_{i=k..n} log_ratios[i].
    let mut tails = Vec::with_capacity(log_ratios.len());
    let mut acc = 0.0;
    for &r in log_ratios.iter().rev() {
        acc += r;
        tails.push(acc);
    }
    let max = tails.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    match kind {
        DetectorKind::Cusum => Ok(max),
        DetectorKind::ShiryaevRoberts => {
            let sum: f64 = tails.iter().map(|&t| libm::exp(t - max)).sum();
            Ok(max + libm::log(sum))
        }
    }
}

/// Runs one detector over a log-ratio stream until the threshold is crossed
/// or `horizon` samples are consumed. The stream must supply at least
/// `horizon` values unless the detector stops earlier.
pub fn run_to_stopping<I>(
    kind: DetectorKind,
    rule: StoppingRule,
    log_ratio_stream: I,
    horizon: u64,
) -> Result<(StoppingOutcome, DetectorState)>
where
    I: IntoIterator<Item = f64>,
{
    assert!(horizon >= 1);
    let mut state = DetectorState::new(kind);
    let mut stream = log_ratio_stream.into_iter();
    for n in 1..=horizon {
        let Some(z) = stream.next() else {
            return Err(Error::StreamTooShort { supplied: n - 1, horizon });
        };
        state.update(z)?;
        if rule.triggered(&state) {
            return Ok((StoppingOutcome::At(n), state));
        }
    }
    Ok((StoppingOutcome::Censored, state))
}
