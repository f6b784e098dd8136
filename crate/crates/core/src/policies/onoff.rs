use serde::{Deserialize, Serialize};

use super::PowerConstraint;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::{quantile, RayleighFadingPair};
use crate::numerics::{maximize_scalar, Tolerance};
use crate::rates::onoff_rate_closed_form;

/// Transmit at constant power whenever h_M exceeds `tau`, stay silent
/// otherwise. The power level spends the whole budget on the on-states:
/// p_const = p_bar / Pr(h_M > τ) = p_bar·e^{τ/γ̄_M}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffPolicy {
    pub tau: f64,
    pub p_const: f64,
    pub model: RayleighFadingPair,
    pub p_bar: f64,
}

impl OnOffPolicy {
    pub fn power(&self, h_m: f64) -> f64 {
        if h_m > self.tau {
            self.p_const
        } else {
            0.0
        }
    }

    /// Pr(h_M > τ).
    pub fn on_probability(&self) -> f64 {
        (-self.tau / self.model.gamma_m).exp()
    }

    /// p_const·Pr(h_M > τ).
    pub fn average_power(&self) -> f64 {
        self.p_const * self.on_probability()
    }
}

/// ```
/// use wiretap_core::fading::RayleighFadingPair;
/// use wiretap_core::policies::{make_onoff, PowerConstraint};
/// let m = RayleighFadingPair::symmetric();
/// let p = make_onoff(&m, &PowerConstraint::new(3.0).unwrap(), std::f64::consts::LN_2).unwrap();
/// assert!((p.p_const - 6.0).abs() < 1e-12);
/// ```
pub fn make_onoff(model: &RayleighFadingPair, constraint: &PowerConstraint, tau: f64) -> Result<OnOffPolicy> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain("make_onoff", format!("threshold must be finite and >= 0, got {tau}")));
    }
    Ok(OnOffPolicy {
        tau,
        p_const: constraint.p_bar * (tau / model.gamma_m).exp(),
        model: *model,
        p_bar: constraint.p_bar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffOptimum {
    pub policy: OnOffPolicy,
    pub rate: f64,
}

/// Upper end of the threshold search, as a quantile of h_M.
const TAU_SEARCH_QUANTILE: f64 = 1.0 - 1e-8;

/// Maximizes the closed-form on/off rate over τ ∈ [0, F⁻¹(1 − 10⁻⁸)].
pub fn optimize_onoff_threshold(
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    cfg: &SolverConfig,
) -> Result<OnOffOptimum> {
    let hi = quantile(TAU_SEARCH_QUANTILE, model.gamma_m)?;
    let tol = Tolerance::new(cfg.quad_rel_tol, cfg.quad_abs_tol, 200)?;
    let rate = |tau: f64| onoff_rate_closed_form(model, constraint, tau).unwrap_or(f64::NAN);
    let best = maximize_scalar(rate, 0.0, hi, tol)?;
    Ok(OnOffOptimum {
        policy: make_onoff(model, constraint, best.x)?,
        rate: best.value,
    })
}
