//! Secrecy-rate functionals, all in nats per channel use.
//!
//! Where the positive part sits matters: for the variable-rate schemes (full
//! CSI, main CSI, on/off) it applies per fading state, inside the expectation;
//! for the constant-rate and receiver-only schemes it applies once, to the
//! averaged difference.

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::{quantile, RayleighFadingPair};
use crate::integrals::{decay_breakpoints, nested, single};
use crate::numerics::{exp_integral_e1, exp_integral_e1_scaled, EULER_GAMMA};
use crate::policies::{ConstantRatePolicy, FullCsiPolicy, MainCsiPolicy, PowerConstraint};

/// Relative gap between the two main-CSI evaluation routes that is treated as
/// an internal error.
pub const MAIN_CSI_ROUTE_TOLERANCE: f64 = 1e-4;

/// Secrecy capacity with full CSI: E{[log(1+h_M P) − log(1+h_E P)]⁺} under
/// the solved policy, by iterated quadrature over the transmission region.
pub fn full_csi_rate(policy: &FullCsiPolicy, cfg: &SolverConfig) -> Result<f64> {
    let lambda = policy.lambda;
    crate::policies::full_csi::integrate_over_support(&policy.model, lambda, cfg, |h_m, h_e| {
        let p = crate::policies::full_csi::power_unchecked(h_m, h_e, lambda);
        (h_m * p).ln_1p() - (h_e * p).ln_1p()
    })
}

/// Per-state main-CSI secrecy rate E_{h_E}{[log(1+hP) − log(1+h_E P)]⁺}
/// for Rayleigh eavesdropper fading:
///
/// log(1+hP) − e^{1/(γ̄_E P)}[E₁(1/(γ̄_E P)) − E₁(h/γ̄_E + 1/(γ̄_E P))].
pub fn main_csi_state_rate(h: f64, p: f64, gamma_e: f64) -> Result<f64> {
    if !(p > 0.0) || !(h > 0.0) {
        return Ok(0.0);
    }
    let b = 1.0 / gamma_e;
    let z = b / p;
    let leak = exp_integral_e1_scaled(z)? - (-b * h).exp() * exp_integral_e1_scaled(z + b * h)?;
    Ok((h * p).ln_1p() - leak)
}

/// One-dimensional E₁ form of the main-CSI rate.
pub fn main_csi_rate_e1_form(policy: &MainCsiPolicy, cfg: &SolverConfig) -> Result<f64> {
    let (gm, ge) = (policy.model.gamma_m, policy.model.gamma_e);
    let top = quantile(cfg.tail_quantile, gm)?;
    let pts = policy.breakpoints(top);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let failure = std::cell::RefCell::new(None);
    let value = single(
        &pts,
        |h| match main_csi_state_rate(h, policy.power(h), ge) {
            Ok(r) => r * (-h / gm).exp() / gm,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value
}

/// Generic double-integral form of the main-CSI rate:
/// ∫∫ [log(1+h_M P(h_M)) − log(1+h_E P(h_M))]⁺ f(h_M) f(h_E).
pub fn main_csi_rate_double_integral(policy: &MainCsiPolicy, cfg: &SolverConfig) -> Result<f64> {
    let (gm, ge) = (policy.model.gamma_m, policy.model.gamma_e);
    let top = quantile(cfg.tail_quantile, gm)?;
    let top_e = quantile(cfg.tail_quantile, ge)?;
    let pts = policy.breakpoints(top);
    if pts.len() < 2 {
        return Ok(0.0);
    }
    nested(
        &pts,
        |h_m| {
            if policy.power(h_m) > 0.0 {
                Some((0.0, h_m.min(top_e)))
            } else {
                None
            }
        },
        |h_m, h_e| {
            let p = policy.power(h_m);
            ((h_m * p).ln_1p() - (h_e * p).ln_1p()) * (-h_m / gm - h_e / ge).exp() / (gm * ge)
        },
        cfg,
    )
}

/// Main-CSI secrecy capacity. Evaluates both the E₁ form and the generic
/// double integral, returns the former, and fails if they disagree by more
/// than [`MAIN_CSI_ROUTE_TOLERANCE`].
pub fn main_csi_rate(policy: &MainCsiPolicy, cfg: &SolverConfig) -> Result<f64> {
    let e1_form = main_csi_rate_e1_form(policy, cfg)?;
    let double = main_csi_rate_double_integral(policy, cfg)?;
    let scale = e1_form.abs().max(double.abs());
    let gap = if scale > 0.0 { (e1_form - double).abs() / scale } else { 0.0 };
    if gap > MAIN_CSI_ROUTE_TOLERANCE {
        return Err(Error::Consistency {
            what: "main-CSI rate (E1 form vs double integral)",
            a: e1_form,
            b: double,
            rel_gap: gap,
        });
    }
    Ok(e1_form)
}

/// Closed-form on/off secrecy rate for threshold τ and power
/// P = p_bar·e^{τ/γ̄_M}:
///
/// e^{−τ/γ̄_M} log(1 + τP) + e^{1/(γ̄_M P)} E₁(τ/γ̄_M + 1/(γ̄_M P))
/// + e^{1/(γ̄_E P) − τ/γ̄_M} [E₁(τ/γ̄_E + 1/(γ̄_E P)) − E₁(1/(γ̄_E P))]
/// − e^{c/P} E₁(c(τ + 1/P)),  with c = 1/γ̄_M + 1/γ̄_E.
///
/// Each exponential–E₁ product is evaluated through the scaled e^{x}E₁(x) so
/// nothing overflows at low power.
pub fn onoff_rate_closed_form(model: &RayleighFadingPair, constraint: &PowerConstraint, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain("onoff_rate_closed_form", format!("threshold must be >= 0, got {tau}")));
    }
    let (gm, ge) = (model.gamma_m, model.gamma_e);
    let t = tau / gm;
    let on = (-t).exp();
    let p = constraint.p_bar * t.exp();
    let a_m = 1.0 / (gm * p);
    let a_e = 1.0 / (ge * p);
    let c = 1.0 / gm + 1.0 / ge;

    let direct = on * (tau * p).ln_1p() + on * exp_integral_e1_scaled(t + a_m)?;
    let eaves = on * ((-tau / ge).exp() * exp_integral_e1_scaled(tau / ge + a_e)? - exp_integral_e1_scaled(a_e)?);
    let joint = (-c * tau).exp() * exp_integral_e1_scaled(c * (tau + 1.0 / p))?;
    Ok(direct + eaves - joint)
}

/// On/off rate by direct iterated quadrature of
/// ∫_{h_M > τ} ∫_{h_E < h_M} [log(1+h_M P) − log(1+h_E P)] f f.
pub fn onoff_rate_quadrature(
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    tau: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let (gm, ge) = (model.gamma_m, model.gamma_e);
    let p = constraint.p_bar * (tau / gm).exp();
    // h_M − τ given h_M > τ is again exponential, so truncate relative to τ.
    let top = tau + quantile(cfg.tail_quantile, gm)?;
    let pts = decay_breakpoints(tau, top, gm);
    nested(
        &pts,
        |h_m| Some((0.0, h_m)),
        |h_m, h_e| ((h_m * p).ln_1p() - (h_e * p).ln_1p()) * (-h_m / gm - h_e / ge).exp() / (gm * ge),
        cfg,
    )
}

/// E{log(1 + h_M p_bar)} − E{log(1 + h_E p_bar)} before the positive part.
pub fn receiver_only_signed(model: &RayleighFadingPair, constraint: &PowerConstraint) -> Result<f64> {
    let p = constraint.p_bar;
    Ok(exp_integral_e1_scaled(1.0 / (model.gamma_m * p))? - exp_integral_e1_scaled(1.0 / (model.gamma_e * p))?)
}

/// Rate with no transmitter CSI: constant power, constant rate, positive part
/// applied to the averaged difference. Exactly zero whenever γ̄_E ≥ γ̄_M.
///
/// ```
/// use wiretap_core::fading::RayleighFadingPair;
/// use wiretap_core::policies::PowerConstraint;
/// use wiretap_core::rates::receiver_only_rate;
/// let m = RayleighFadingPair::new(1.0, 2.0).unwrap();
/// let c = PowerConstraint::new(10.0).unwrap();
/// assert_eq!(receiver_only_rate(&m, &c).unwrap(), 0.0);
/// ```
pub fn receiver_only_rate(model: &RayleighFadingPair, constraint: &PowerConstraint) -> Result<f64> {
    if model.gamma_e >= model.gamma_m {
        return Ok(0.0);
    }
    Ok(receiver_only_signed(model, constraint)?.max(0.0))
}

/// Value of the constant-rate objective for a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRateValue {
    /// The expectation of the signed difference.
    pub signed: f64,
    /// `max(signed, 0)`.
    pub rate: f64,
    pub clamped: bool,
}

/// E_{h_M}{log(1 + h_M P(h_M)) − E_{h_E} log(1 + h_E P(h_M))}, with the inner
/// expectation in closed form e^{1/(γ̄_E P)} E₁(1/(γ̄_E P)).
pub fn constant_rate_objective(policy: &ConstantRatePolicy, cfg: &SolverConfig) -> Result<ConstantRateValue> {
    let (gm, ge) = (policy.model.gamma_m, policy.model.gamma_e);
    let top = quantile(cfg.tail_quantile, gm)?;
    let pts = policy.breakpoints(top);
    let signed = if pts.len() < 2 {
        0.0
    } else {
        let failure = std::cell::RefCell::new(None);
        let v = single(
            &pts,
            |h| {
                let p = policy.power(h);
                if p <= 0.0 {
                    return 0.0;
                }
                match exp_integral_e1_scaled(1.0 / (ge * p)) {
                    Ok(leak) => ((h * p).ln_1p() - leak) * (-h / gm).exp() / gm,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            cfg,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        v?
    };
    Ok(ConstantRateValue {
        signed,
        rate: signed.max(0.0),
        clamped: signed < 0.0,
    })
}

/// ∫₀^x (1 − e^{−t})/t dt = E₁(x) + ln x + γ, without cancellation for small x.
fn ein(x: f64) -> Result<f64> {
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= -x / kf;
            let c = -term / kf;
            sum += c;
            if c.abs() <= f64::EPSILON * sum.abs() {
                break;
            }
        }
        Ok(sum)
    } else {
        Ok(exp_integral_e1(x)? + x.ln() + EULER_GAMMA)
    }
}

/// High-SNR limit E{log(h_M/h_E)·1{h_M > h_E}}, common to the full-CSI
/// capacity and the on/off rate as p_bar → ∞.
///
/// The inner integral over h_E has a log singularity at 0; it is done
/// analytically, ∫₀^h log(h/x) f_E(x) dx = Ein(h/γ̄_E), leaving one quadrature.
pub fn high_snr_limit(model: &RayleighFadingPair, cfg: &SolverConfig) -> Result<f64> {
    let (gm, ge) = (model.gamma_m, model.gamma_e);
    let top = quantile(cfg.tail_quantile, gm)?;
    let pts = decay_breakpoints(0.0, top, gm);
    let failure = std::cell::RefCell::new(None);
    let v = single(
        &pts,
        |h| match ein(h / ge) {
            Ok(v) => v * (-h / gm).exp() / gm,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ein_branches_agree() {
        let x = 1.0;
        let series = ein(x).unwrap();
        let direct = exp_integral_e1(x).unwrap() + EULER_GAMMA;
        assert!((series - direct).abs() < 1e-15);
        assert!((ein(1e-9).unwrap() - (1e-9 - 0.25e-18)).abs() < 1e-24);
    }

    #[test]
    fn receiver_only_vanishes_for_equal_means() {
        let m = RayleighFadingPair::new(1.7, 1.7).unwrap();
        let c = PowerConstraint::new(5.0).unwrap();
        assert_eq!(receiver_only_rate(&m, &c).unwrap(), 0.0);
        assert_eq!(receiver_only_signed(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn state_rate_zero_at_zero_power() {
        assert_eq!(main_csi_state_rate(2.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(main_csi_state_rate(0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn onoff_rate_vanishes_for_huge_threshold() {
        let m = RayleighFadingPair::symmetric();
        let c = PowerConstraint::new(1.0).unwrap();
        let tau = quantile(1.0 - 1e-9, 1.0).unwrap();
        let r = onoff_rate_closed_form(&m, &c, tau).unwrap();
        assert!(r >= 0.0 && r < 1e-7, "{r}");
    }
}
