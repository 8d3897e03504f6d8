use core::fmt;

/// Errors raised by model construction and detector operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Correlation coefficient outside (-1, 1).
    InvalidCorrelation(f64),
    /// Probability parameter outside its valid range.
    InvalidProbability(f64),
    /// Operation requires a proper change-point prior but got `NoChange`.
    NoChangePrior,
    /// Index argument outside the valid range.
    IndexOutOfRange { index: usize, len: usize },
    /// A log-likelihood-ratio stream produced a non-finite value.
    NonFiniteLogRatio(f64),
    /// Empty input where at least one element is required.
    EmptyInput,
    /// The observation stream ended before the detector stopped or the
    /// horizon was reached.
    StreamTooShort { supplied: u64, horizon: u64 },
    /// Threshold or rate parameter outside its valid range.
    InvalidThreshold(f64),
    /// `alpha` outside (0, 1).
    InvalidAlpha(f64),
    /// Prior mean below 1 (the change point is at least 1).
    InvalidPriorMean(f64),
    /// KL gap is exactly zero; the bounds do not cover this case.
    DegenerateGap,
    /// KL gap has the wrong sign for the requested quantity.
    NonPositiveGap(f64),
    /// Least-squares fit needs at least two distinct abscissae.
    DegenerateFit,
    /// Simulation configuration rejected before any trial ran.
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCorrelation(r) => {
                write!(f, "correlation must satisfy |rho| < 1, got {r}")
            }
            Error::InvalidProbability(p) => {
                write!(f, "probability must lie strictly inside its range, got {p}")
            }
            Error::NoChangePrior => {
                write!(f, "operation undefined for the no-change (theta = infinity) prior")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::NonFiniteLogRatio(v) => {
                write!(f, "non-finite log-likelihood ratio {v}")
            }
            Error::EmptyInput => write!(f, "input must be non-empty"),
            Error::StreamTooShort { supplied, horizon } => {
                write!(f, "stream ended after {supplied} samples, horizon {horizon}")
            }
            Error::InvalidThreshold(a) => write!(f, "threshold must be positive, got {a}"),
            Error::InvalidAlpha(a) => write!(f, "alpha must lie in (0, 1), got {a}"),
            Error::InvalidPriorMean(t) => write!(f, "prior mean must be >= 1, got {t}"),
            Error::DegenerateGap => write!(f, "KL gap is zero; regime is degenerate"),
            Error::NonPositiveGap(g) => write!(f, "KL gap must be positive, got {g}"),
            Error::DegenerateFit => write!(f, "need at least two distinct x values"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
