//! Observation models, the change-point prior, and KL divergence.
//!
//! Shipped models are i.i.d.; `log_density` and `sample` nevertheless take the
//! observation history so that conditional (non-i.i.d.) models fit the same
//! interface.

use libm::{log, log1p, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::trial_rng;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// A conditional observation density with sampling.
pub trait ObservationModel {
    type Obs: Copy + core::fmt::Debug;

    /// Log density of `x` given the prior observations.
    fn log_density(&self, x: &Self::Obs, history: &[Self::Obs]) -> f64;

    /// Draws one observation given the prior observations.
    fn sample<R: Rng>(&self, rng: &mut R, history: &[Self::Obs]) -> Self::Obs;
}

/// Zero-mean bivariate Gaussian with unit variances and correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    rho: f64,
}

impl GaussianModel {
    /// Rejects `|rho| >= 1` so that evaluation never has to.
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho.abs() >= 1.0 {
            return Err(Error::InvalidCorrelation(rho));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// det R = 1 - rho^2.
    fn det(&self) -> f64 {
        (1.0 - self.rho) * (1.0 + self.rho)
    }
}

impl ObservationModel for GaussianModel {
    type Obs = [f64; 2];

    fn log_density(&self, x: &[f64; 2], _history: &[[f64; 2]]) -> f64 {
        let det = self.det();
        // x' R^{-1} x in closed form for d = 2.
        let quad = (x[0] * x[0] + x[1] * x[1] - 2.0 * self.rho * x[0] * x[1]) / det;
        -LN_2PI - 0.5 * log(det) - 0.5 * quad
    }

    fn sample<R: Rng>(&self, rng: &mut R, _history: &[[f64; 2]]) -> [f64; 2] {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        [z0, self.rho * z0 + sqrt(self.det()) * z1]
    }
}

/// Bernoulli observation model; exists to enable exact enumeration oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliModel {
    p: f64,
}

impl BernoulliModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl ObservationModel for BernoulliModel {
    type Obs = bool;

    fn log_density(&self, x: &bool, _history: &[bool]) -> f64 {
        if *x {
            log(self.p)
        } else {
            log1p(-self.p)
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R, _history: &[bool]) -> bool {
        rng.random::<f64>() < self.p
    }
}

/// The sample index at which the distribution switches, or never.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangePoint {
    /// Change at sample `k` (1-based): samples `n >= k` are post-change.
    At(u64),
    /// No change ever occurs (theta = infinity).
    Never,
}

impl ChangePoint {
    /// True when sample `n` (1-based) is drawn from the post-change model.
    pub fn is_post_change(&self, n: u64) -> bool {
        match self {
            ChangePoint::At(k) => n >= *k,
            ChangePoint::Never => false,
        }
    }
}

/// Geometric prior over the change point, or the no-change configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChangePointPrior {
    /// pi_k = (1 - p0)^(k-1) p0 on k = 1, 2, ...
    Geometric { p0: f64 },
    /// theta = infinity surely.
    NoChange,
}

impl ChangePointPrior {
    pub fn geometric(p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(Error::InvalidProbability(p0));
        }
        Ok(Self::Geometric { p0 })
    }

    /// pi_k = (1 - p0)^(k-1) p0; undefined for the no-change prior.
    pub fn pmf(&self, k: u64) -> Result<f64> {
        match self {
            ChangePointPrior::Geometric { p0 } => {
                assert!(k >= 1, "change point index is 1-based");
                Ok(libm::pow(1.0 - p0, (k - 1) as f64) * p0)
            }
            ChangePointPrior::NoChange => Err(Error::NoChangePrior),
        }
    }

    /// Prior mean of the change point, 1/p0.
    pub fn mean(&self) -> Result<f64> {
        match self {
            ChangePointPrior::Geometric { p0 } => Ok(1.0 / p0),
            ChangePointPrior::NoChange => Err(Error::NoChangePrior),
        }
    }

    /// Draws a change point; `Never` always yields [`ChangePoint::Never`].
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ChangePoint {
        match self {
            ChangePointPrior::Geometric { p0 } => {
                if *p0 >= 1.0 {
                    return ChangePoint::At(1);
                }
                // Inverse CDF: k = floor(log(u) / log(1 - p0)) + 1, u in (0, 1].
                let u = 1.0 - rng.random::<f64>();
                let k = libm::floor(log(u) / log1p(-p0)) + 1.0;
                ChangePoint::At(if k < 1.0 { 1 } else { k as u64 })
            }
            ChangePointPrior::NoChange => ChangePoint::Never,
        }
    }
}

/// KL(N(0, R_p) || N(0, R_q)) for the two bivariate models, in closed form:
/// 0.5 * [tr(R_q^{-1} R_p) - 2 + log(det R_q / det R_p)].
pub fn gaussian_kl(p: &GaussianModel, q: &GaussianModel) -> f64 {
    let (rp, rq) = (p.rho(), q.rho());
    let (det_p, det_q) = (1.0 - rp * rp, 1.0 - rq * rq);
    let trace = 2.0 * (1.0 - rp * rq) / det_q;
    0.5 * (trace - 2.0 + log(det_q / det_p))
}

/// Monte Carlo estimate of KL(p || q) as mean and standard error of
/// `log p(x) - log q(x)` over `n_samples` draws from `p`. Deterministic in
/// `seed`; serves as the independent oracle for [`gaussian_kl`].
pub fn kl_monte_carlo<M: ObservationModel>(
    p: &M,
    q: &M,
    n_samples: u64,
    seed: u64,
) -> (f64, f64) {
    assert!(n_samples >= 1000, "too few samples for a stable estimate");
    let mut rng = trial_rng(seed, 0, crate::simulator::StreamPurpose::KlOracle as u64);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let x = p.sample(&mut rng, &[]);
        let d = p.log_density(&x, &[]) - q.log_density(&x, &[]);
        sum += d;
        sum_sq += d * d;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, sqrt(var / n))
}
