//! One entry point for every transmission scheme.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::RayleighFadingPair;
use crate::policies::{
    make_onoff, optimize_onoff_threshold, solve_constant_rate, solve_full_csi, solve_main_csi, PowerConstraint,
};
use crate::rates::{
    constant_rate_objective, full_csi_rate, main_csi_rate, onoff_rate_closed_form, receiver_only_rate,
    receiver_only_signed,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FullCsi,
    MainCsi,
    Onoff,
    ConstantRate,
    ReceiverOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::FullCsi,
        Scheme::MainCsi,
        Scheme::Onoff,
        Scheme::ConstantRate,
        Scheme::ReceiverOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::FullCsi => "full_csi",
            Scheme::MainCsi => "main_csi",
            Scheme::Onoff => "onoff",
            Scheme::ConstantRate => "constant_rate",
            Scheme::ReceiverOnly => "receiver_only",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Solver-side details of an evaluation. Fields that do not apply to a
/// scheme are left out.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_const: Option<f64>,
    /// Main-channel gain below which nothing is sent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt_residual: Option<f64>,
    /// Rate before the positive part, for schemes that apply it to the
    /// averaged difference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signed_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped: Option<bool>,
    pub converged: bool,
}

/// Result of solving and evaluating one scheme at one power budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeEvaluation {
    pub scheme: Scheme,
    pub p_bar: f64,
    pub rate_nats: f64,
    pub realized_power: f64,
    pub diagnostics: Diagnostics,
}

/// Solves `scheme` for the given budget and evaluates its secrecy rate.
///
/// For the on/off scheme, `tau = Some(τ)` fixes the threshold; `None`
/// optimizes it. `tau` is ignored by the other schemes.
///
/// The constant-rate solver may return a policy whose KKT conditions or power
/// constraint are not met to tolerance; that is reported through
/// `diagnostics.converged` rather than as an error.
///
/// ```
/// use wiretap_core::prelude::*;
/// let model = RayleighFadingPair::symmetric();
/// let budget = PowerConstraint::new(1.0).unwrap();
/// let ev = evaluate(Scheme::Onoff, &model, &budget, Some(0.0), &SolverConfig::default()).unwrap();
/// assert_eq!(ev.diagnostics.p_const, Some(1.0));
/// ```
pub fn evaluate(
    scheme: Scheme,
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    tau: Option<f64>,
    cfg: &SolverConfig,
) -> Result<SchemeEvaluation> {
    cfg.validate()?;
    let p_bar = constraint.p_bar;
    let (rate_nats, realized_power, diagnostics) = match scheme {
        Scheme::FullCsi => {
            let policy = solve_full_csi(model, constraint, cfg)?;
            let rate = full_csi_rate(&policy, cfg)?;
            let diag = Diagnostics {
                lambda: Some(policy.lambda),
                dual_evaluations: Some(policy.dual_evaluations),
                converged: true,
                ..Diagnostics::default()
            };
            (rate, policy.realized_power, diag)
        }
        Scheme::MainCsi => {
            let policy = solve_main_csi(model, constraint, cfg)?;
            let rate = main_csi_rate(&policy, cfg)?;
            let diag = Diagnostics {
                lambda: Some(policy.lambda),
                dual_evaluations: Some(policy.dual_evaluations),
                cutoff: Some(policy.cutoff),
                converged: true,
                ..Diagnostics::default()
            };
            (rate, policy.realized_power, diag)
        }
        Scheme::Onoff => {
            let (policy, rate) = match tau {
                Some(t) => {
                    let policy = make_onoff(model, constraint, t)?;
                    (policy, onoff_rate_closed_form(model, constraint, t)?)
                }
                None => {
                    let best = optimize_onoff_threshold(model, constraint, cfg)?;
                    (best.policy, best.rate)
                }
            };
            let diag = Diagnostics {
                tau: Some(policy.tau),
                p_const: Some(policy.p_const),
                cutoff: Some(policy.tau),
                converged: true,
                ..Diagnostics::default()
            };
            (rate.max(0.0), policy.average_power(), diag)
        }
        Scheme::ConstantRate => {
            let policy = solve_constant_rate(model, constraint, cfg)?;
            let value = constant_rate_objective(&policy, cfg)?;
            let diag = Diagnostics {
                lambda: Some(policy.lambda),
                dual_evaluations: Some(policy.dual_evaluations),
                cutoff: Some(policy.switch_gain),
                kkt_residual: Some(policy.kkt_residual),
                signed_rate: Some(value.signed),
                clamped: Some(value.clamped),
                converged: policy.converged,
                ..Diagnostics::default()
            };
            (value.rate, policy.realized_power, diag)
        }
        Scheme::ReceiverOnly => {
            let signed = receiver_only_signed(model, constraint)?;
            let rate = receiver_only_rate(model, constraint)?;
            let diag = Diagnostics {
                signed_rate: Some(signed),
                clamped: Some(signed < 0.0),
                converged: true,
                ..Diagnostics::default()
            };
            (rate, p_bar, diag)
        }
    };
    Ok(SchemeEvaluation {
        scheme,
        p_bar,
        rate_nats,
        realized_power,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("fullcsi".parse::<Scheme>().is_err());
    }

    #[test]
    fn receiver_only_is_zero_when_eavesdropper_stronger() {
        let m = RayleighFadingPair::new(1.0, 2.0).unwrap();
        let ev = evaluate(
            Scheme::ReceiverOnly,
            &m,
            &PowerConstraint::new(10.0).unwrap(),
            None,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(ev.rate_nats, 0.0);
        assert_eq!(ev.diagnostics.clamped, Some(true));
    }
}
