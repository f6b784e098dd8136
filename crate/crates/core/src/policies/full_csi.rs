use serde::{Deserialize, Serialize};

use super::{solve_dual, PowerConstraint};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::{quantile, ChannelState, RayleighFadingPair};
use crate::integrals::{decay_breakpoints, nested};

/// Optimal policy when the transmitter knows both gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullCsiPolicy {
    pub lambda: f64,
    pub model: RayleighFadingPair,
    pub p_bar: f64,
    pub realized_power: f64,
    pub dual_evaluations: usize,
}

impl FullCsiPolicy {
    pub fn power(&self, h_m: f64, h_e: f64) -> f64 {
        power_unchecked(h_m, h_e, self.lambda)
    }
}

/// Per-state maximizer of log(1+h_M P) − log(1+h_E P) − λP over P ≥ 0:
///
/// P = ½[√((1/h_E − 1/h_M)² + (4/λ)(1/h_E − 1/h_M)) − (1/h_M + 1/h_E)]⁺.
///
/// Evaluated in a rationalized form that has no cancellation and stays finite
/// at h_E = 0, where it reduces to the water-filling level 1/λ − 1/h_M.
/// Transmission happens exactly when h_M − h_E > λ.
///
/// ```
/// use wiretap_core::fading::ChannelState;
/// use wiretap_core::policies::full_csi_power;
/// let s = ChannelState::new(1.0, 2.0).unwrap();
/// assert_eq!(full_csi_power(s, 0.1).unwrap(), 0.0);
/// ```
pub fn full_csi_power(state: ChannelState, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain("full_csi_power", format!("lambda must be > 0, got {lambda}")));
    }
    if !(state.h_m >= 0.0) || !(state.h_e >= 0.0) {
        return Err(Error::domain("full_csi_power", format!("gains must be >= 0, got {state:?}")));
    }
    Ok(power_unchecked(state.h_m, state.h_e, lambda))
}

#[inline]
pub(crate) fn power_unchecked(h_m: f64, h_e: f64, lambda: f64) -> f64 {
    let margin = h_m - h_e - lambda;
    if !(margin > 0.0) {
        return 0.0;
    }
    let ratio = h_e / h_m;
    let u = 1.0 - ratio;
    let num = 2.0 * margin / (lambda * h_m);
    let den = (u * u + 4.0 * h_e * u / lambda).sqrt() + 1.0 + ratio;
    num / den
}

/// E{P(h_M, h_E)} for a given λ, by iterated quadrature over the region
/// h_M > h_E + λ where the policy is positive.
pub fn full_csi_average_power(model: &RayleighFadingPair, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
    integrate_over_support(model, lambda, cfg, |h_m, h_e| power_unchecked(h_m, h_e, lambda))
}

/// ∫∫_{h_M > h_E + λ} g(h_M, h_E) f(h_M) f(h_E), truncated at the configured
/// tail quantile in each dimension.
pub(crate) fn integrate_over_support<G>(
    model: &RayleighFadingPair,
    lambda: f64,
    cfg: &SolverConfig,
    g: G,
) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let (gm, ge) = (model.gamma_m, model.gamma_e);
    let top_m = quantile(cfg.tail_quantile, gm)?;
    let top_e = quantile(cfg.tail_quantile, ge)?;
    let outer_top = top_e.min(top_m - lambda);
    if !(outer_top > 0.0) {
        return Ok(0.0);
    }
    let outer = decay_breakpoints(0.0, outer_top, ge);
    nested(
        &outer,
        |h_e| Some((h_e + lambda, top_m)),
        |h_e, h_m| g(h_m, h_e) * (-h_m / gm - h_e / ge).exp() / (gm * ge),
        cfg,
    )
}

/// Solves for the dual variable that spends exactly `p_bar` on average.
pub fn solve_full_csi(
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    cfg: &SolverConfig,
) -> Result<FullCsiPolicy> {
    cfg.validate()?;
    let dual = solve_dual(|l| full_csi_average_power(model, l, cfg), constraint.p_bar, cfg)?;
    Ok(FullCsiPolicy {
        lambda: dual.lambda,
        model: *model,
        p_bar: constraint.p_bar,
        realized_power: dual.realized_power,
        dual_evaluations: dual.evaluations,
    })
}
