//! Sequential quickest change detection under post-change model mismatch.
//!
//! The detector observes a stream whose distribution switches from a known
//! pre-change model `f0` to an unknown post-change model `f1` at a random
//! change point. The detector runs CUSUM or Shiryaev-Roberts statistics built
//! from an *assumed* post-change model `f1_assumed` that may differ from the
//! true `f1`. This crate provides:
//!
//! - observation models (bivariate Gaussian, Bernoulli) and the geometric
//!   change-point prior ([`distributions`]);
//! - step-wise and cumulative log-likelihood ratios, including the
//!   true-vs-assumed diagnostic ratio ([`likelihood`]);
//! - log-domain CUSUM and Shiryaev-Roberts state machines with definitional
//!   brute-force oracles ([`detectors`]);
//! - closed-form ARL/PFA/ADD bounds and regime classification by the KL
//!   divergence gap ([`bounds`]);
//! - a deterministic Monte Carlo trial runner with per-trial seeding
//!   ([`simulator`]).
//!
//! The crate is `no_std` (with `alloc`); IO, CLI, and file formats live in
//! the companion `qcd-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
pub mod detectors;
pub mod distributions;
mod error;
pub mod likelihood;
pub mod rng;
pub mod simulator;

pub use bounds::{AddBound, DivergencePair, RegimeClass};
pub use detectors::{DetectorKind, DetectorState, StoppingOutcome, StoppingRule};
pub use distributions::{
    BernoulliModel, ChangePoint, ChangePointPrior, GaussianModel, ObservationModel,
};
pub use error::{Error, Result};
pub use likelihood::{LogRatioTriple, ModelTriple};
pub use simulator::{Estimate, ExperimentConfig, MetricsEstimate, RunRecord, StreamPurpose};
