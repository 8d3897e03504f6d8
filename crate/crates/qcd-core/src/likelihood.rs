//! Log-likelihood ratios between the pre-change, true post-change, and
//! assumed post-change models.
//!
//! All quantities stay in the log domain; the cumulative products the
//! detectors consume would overflow at run lengths in the thousands.

use crate::distributions::ObservationModel;
use crate::error::{Error, Result};

/// The three models a mismatched detection problem is built from.
#[derive(Debug, Clone)]
pub struct ModelTriple<M: ObservationModel> {
    /// Pre-change model f0.
    pub f0: M,
    /// True post-change model f1.
    pub f1_true: M,
    /// Post-change model the detector assumes; equal to `f1_true` in the
    /// matched (classical) configuration.
    pub f1_assumed: M,
}

impl<M: ObservationModel + Clone> ModelTriple<M> {
    pub fn new(f0: M, f1_true: M, f1_assumed: M) -> Self {
        Self { f0, f1_true, f1_assumed }
    }

    /// Matched configuration: the detector knows the true post-change model.
    pub fn matched(f0: M, f1: M) -> Self {
        Self { f0, f1_true: f1.clone(), f1_assumed: f1 }
    }
}

/// One observation's worth of log-likelihood ratios.
///
/// The additive identity `log_lambda = log_lambda_tilde + log_lambda_11`
/// holds exactly (up to rounding) by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogRatioTriple {
    /// log( f1_true / f0 ): the ratio a matched detector would use.
    pub log_lambda: f64,
    /// log( f1_assumed / f0 ): the ratio the mismatched detector uses.
    pub log_lambda_tilde: f64,
    /// log( f1_true / f1_assumed ): diagnostic ratio governing delay loss.
    pub log_lambda_11: f64,
}

impl LogRatioTriple {
    fn add(&mut self, other: &LogRatioTriple) {
        self.log_lambda += other.log_lambda;
        self.log_lambda_tilde += other.log_lambda_tilde;
        self.log_lambda_11 += other.log_lambda_11;
    }
}

/// Evaluates all three step ratios at one observation.
pub fn log_ratio_step<M: ObservationModel>(
    triple: &ModelTriple<M>,
    x: &M::Obs,
    history: &[M::Obs],
) -> LogRatioTriple {
    let l0 = triple.f0.log_density(x, history);
    let l1 = triple.f1_true.log_density(x, history);
    let la = triple.f1_assumed.log_density(x, history);
    LogRatioTriple {
        log_lambda: l1 - l0,
        log_lambda_tilde: la - l0,
        log_lambda_11: l1 - la,
    }
}

/// Sums the step ratios over `xs[k-1 ..]`, i.e. the log of the cumulative
/// products starting from 1-based change-point candidate `k`.
pub fn cumulative_log_ratio<M: ObservationModel>(
    triple: &ModelTriple<M>,
    xs: &[M::Obs],
    k: usize,
) -> Result<LogRatioTriple> {
    if k < 1 || k > xs.len() {
        return Err(Error::IndexOutOfRange { index: k, len: xs.len() });
    }
    let mut total = LogRatioTriple::default();
    for i in (k - 1)..xs.len() {
        total.add(&log_ratio_step(triple, &xs[i], &xs[..i]));
    }
    Ok(total)
}
