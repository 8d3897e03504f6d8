//! Closed-form performance bounds for mismatched CUSUM / Shiryaev-Roberts
//! procedures: ARL lower bound, PFA upper bounds, threshold selection for a
//! PFA target, the asymptotic ADD upper bound, and regime classification by
//! the KL divergence gap.

use crate::detectors::DetectorKind;
use crate::error::{Error, Result};

/// The two KL divergences that govern mismatched detection: `d10` between the
/// true post- and pre-change models, `d11_tilde` between the true and assumed
/// post-change models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergencePair {
    d10: f64,
    d11_tilde: f64,
}

impl DivergencePair {
    pub fn new(d10: f64, d11_tilde: f64) -> Result<Self> {
        if d10.is_nan() || d10 < 0.0 {
            return Err(Error::InvalidThreshold(d10));
        }
        if d11_tilde.is_nan() || d11_tilde < 0.0 {
            return Err(Error::InvalidThreshold(d11_tilde));
        }
        Ok(Self { d10, d11_tilde })
    }

    pub fn d10(&self) -> f64 {
        self.d10
    }

    pub fn d11_tilde(&self) -> f64 {
        self.d11_tilde
    }

    /// The gap d10 - d11_tilde; its sign decides the delay regime.
    pub fn gap(&self) -> f64 {
        self.d10 - self.d11_tilde
    }
}

/// Delay regime decided by the sign of the KL gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeClass {
    /// gap > 0: the asymptotic ADD upper bound applies.
    FiniteAddBound,
    /// gap < 0: the CUSUM delay diverges.
    InfiniteCusumAdd,
    /// gap = 0 exactly; not covered by the analysis.
    Degenerate,
}

impl RegimeClass {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeClass::FiniteAddBound => "finite-add-bound",
            RegimeClass::InfiniteCusumAdd => "infinite-cusum-add",
            RegimeClass::Degenerate => "degenerate",
        }
    }
}

/// Asymptotic ADD upper bound, finite or divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AddBound {
    /// Plug-in value of the asymptotic bound at finite alpha; a guide curve,
    /// exact only as alpha -> 0.
    Finite(f64),
    /// Divergent delay. For SR the conclusion holds only under an extra
    /// asymptotic equivalence of the two statistics, hence the qualifier.
    Infinite { asymptotic_only: bool },
}

/// ARL >= A for both procedures, matched or mismatched.
pub fn arl_lower_bound(a: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidThreshold(a));
    }
    Ok(a)
}

/// PFA upper bound at threshold `a`: min(theta_bar/A, 1) for SR, min(1/A, 1)
/// for CUSUM.
pub fn pfa_upper_bound(kind: DetectorKind, a: f64, theta_bar: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidThreshold(a));
    }
    if theta_bar.is_nan() || theta_bar < 1.0 {
        return Err(Error::InvalidPriorMean(theta_bar));
    }
    let bound = match kind {
        DetectorKind::Cusum => 1.0 / a,
        DetectorKind::ShiryaevRoberts => theta_bar / a,
    };
    Ok(bound.min(1.0))
}

/// Smallest threshold from the bounds that guarantees PFA <= alpha:
/// A = 1/alpha for CUSUM, A = theta_bar/alpha for SR.
pub fn threshold_for_pfa(kind: DetectorKind, alpha: f64, theta_bar: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if theta_bar.is_nan() || theta_bar < 1.0 {
        return Err(Error::InvalidPriorMean(theta_bar));
    }
    Ok(match kind {
        DetectorKind::Cusum => 1.0 / alpha,
        DetectorKind::ShiryaevRoberts => theta_bar / alpha,
    })
}

/// Asymptotic ADD upper bound at PFA target `alpha`, evaluated as a plug-in
/// at finite alpha:
///   CUSUM: |log alpha| / ((1 - alpha) * gap)
///   SR:    (log theta_bar - log alpha) / ((1 - alpha) * gap)
/// For gap < 0 the CUSUM delay is divergent; for SR divergence holds only
/// asymptotically, which the result flags.
pub fn add_asymptotic_upper(
    kind: DetectorKind,
    alpha: f64,
    theta_bar: f64,
    div: &DivergencePair,
) -> Result<AddBound> {
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    if theta_bar.is_nan() || theta_bar < 1.0 {
        return Err(Error::InvalidPriorMean(theta_bar));
    }
    let gap = div.gap();
    if gap == 0.0 {
        return Err(Error::DegenerateGap);
    }
    if gap < 0.0 {
        return Ok(AddBound::Infinite {
            asymptotic_only: kind == DetectorKind::ShiryaevRoberts,
        });
    }
    let numerator = match kind {
        DetectorKind::Cusum => -libm::log(alpha),
        DetectorKind::ShiryaevRoberts => libm::log(theta_bar) - libm::log(alpha),
    };
    Ok(AddBound::Finite(numerator / ((1.0 - alpha) * gap)))
}

/// FiniteAddBound for gap > 0, InfiniteCusumAdd for gap < 0, Degenerate at 0.
pub fn classify_regime(div: &DivergencePair) -> RegimeClass {
    let gap = div.gap();
    if gap > 0.0 {
        RegimeClass::FiniteAddBound
    } else if gap < 0.0 {
        RegimeClass::InfiniteCusumAdd
    } else {
        RegimeClass::Degenerate
    }
}

/// Predicted slope of ADD versus log A: 1/gap. Requires gap > 0.
pub fn add_slope(div: &DivergencePair) -> Result<f64> {
    let gap = div.gap();
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::NonPositiveGap(gap));
    }
    Ok(1.0 / gap)
}
