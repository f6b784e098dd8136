//! Power-allocation policies and their solvers.
//!
//! Every variable-power scheme is solved through its Lagrangian: for a fixed
//! dual variable λ the per-state problem is solved pointwise, and λ is then
//! tuned by a bracketed search until the long-term average power equals the
//! budget `p_bar`.

mod constant_rate;
pub(crate) mod full_csi;
mod main_csi;
mod onoff;

pub use constant_rate::{mean_gain_ratio, solve_constant_rate, ConstantRatePolicy};
pub use full_csi::{full_csi_average_power, full_csi_power, solve_full_csi, FullCsiPolicy};
pub use main_csi::{
    main_csi_average_power, main_csi_marginal_rate, main_csi_power, partial_mean_gain_ratio, solve_main_csi,
    MainCsiPolicy,
};
pub use onoff::{make_onoff, optimize_onoff_threshold, OnOffOptimum, OnOffPolicy};

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::numerics::{find_root_bracketed, Tolerance};

/// Long-term average transmit power budget (noise variance 1, so this is also
/// the average SNR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConstraint {
    pub p_bar: f64,
}

impl PowerConstraint {
    pub fn new(p_bar: f64) -> Result<Self> {
        if p_bar > 0.0 && p_bar.is_finite() {
            Ok(PowerConstraint { p_bar })
        } else {
            Err(Error::domain("PowerConstraint", format!("p_bar must be positive and finite, got {p_bar}")))
        }
    }

    pub fn from_db(p_bar_db: f64) -> Result<Self> {
        Self::new(10f64.powf(p_bar_db / 10.0))
    }
}

/// Outcome of the outer search on the dual variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DualSolution {
    pub lambda: f64,
    pub realized_power: f64,
    pub evaluations: usize,
}

const LAMBDA_START: (f64, f64) = (1e-8, 1e4);
const LAMBDA_LIMITS: (f64, f64) = (1e-200, 1e200);

/// Finds λ with `average_power(λ) = p_bar`, assuming the average power is
/// non-increasing in λ.
///
/// The bracket starts at [1e-8, 1e4] and grows by factors of 100 until the
/// constraint changes sign; it is then narrowed geometrically to a factor of 2
/// before a regula-falsi search in λ finishes the job.
pub(crate) fn solve_dual<F>(average_power: F, p_bar: f64, cfg: &SolverConfig) -> Result<DualSolution>
where
    F: Fn(f64) -> Result<f64>,
{
    let evaluations = std::cell::Cell::new(0usize);
    let gap = |lambda: f64| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        Ok(average_power(lambda)? - p_bar)
    };

    let (mut lo, mut hi) = LAMBDA_START;
    let mut g_lo = gap(lo)?;
    while g_lo < 0.0 {
        hi = lo;
        lo *= 1e-2;
        if lo < LAMBDA_LIMITS.0 {
            return Err(bracket_failure(lo, hi, g_lo));
        }
        g_lo = gap(lo)?;
    }
    let mut g_hi = gap(hi)?;
    while g_hi > 0.0 {
        lo = hi;
        g_lo = g_hi;
        hi *= 1e2;
        if hi > LAMBDA_LIMITS.1 {
            return Err(bracket_failure(lo, hi, g_hi));
        }
        g_hi = gap(hi)?;
    }
    while hi / lo > 2.0 {
        let mid = (lo * hi).sqrt();
        let g_mid = gap(mid)?;
        if g_mid == 0.0 {
            return Ok(DualSolution { lambda: mid, realized_power: p_bar, evaluations: evaluations.get() });
        }
        if g_mid > 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    if g_lo == 0.0 {
        return Ok(DualSolution { lambda: lo, realized_power: p_bar, evaluations: evaluations.get() });
    }
    if g_hi == 0.0 {
        return Ok(DualSolution { lambda: hi, realized_power: p_bar, evaluations: evaluations.get() });
    }

    let tol = Tolerance::new(cfg.lambda_tol, cfg.lambda_tol * 0.1 * p_bar, 200)?;
    let failure = std::cell::RefCell::new(None);
    let root = find_root_bracketed(
        |lambda| match gap(lambda) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let root = root?;
    Ok(DualSolution {
        lambda: root.x,
        realized_power: root.f_x + p_bar,
        evaluations: evaluations.get(),
    })
}

fn bracket_failure(lo: f64, hi: f64, g: f64) -> Error {
    Error::NoConvergence {
        what: "dual variable bracket",
        iterations: 0,
        estimate: 0.5 * (lo + hi),
        error_bound: g.abs(),
    }
}

/// Log-spaced nodes on [lo, hi].
pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
