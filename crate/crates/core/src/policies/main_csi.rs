use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_grid, solve_dual, PowerConstraint};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::{quantile, RayleighFadingPair};
use crate::integrals::single;
use crate::numerics::{exp_integral_e1_scaled, find_root_bracketed, integrate_1d, MonotoneCubic, Tolerance};

/// Quantiles of h_M spanned by the tabulation grid.
const GRID_QUANTILES: (f64, f64) = (1e-8, 1.0 - 1e-8);

/// Optimal policy when the transmitter knows only the main-channel gain.
///
/// Tabulated on a log-spaced h_M grid and interpolated with a shape-preserving
/// cubic. The policy is zero up to and including `cutoff`, the gain at which
/// the marginal secrecy rate at zero power equals λ; `cutoff` is always the
/// first node of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainCsiPolicy {
    pub lambda: f64,
    pub cutoff: f64,
    pub grid: Vec<(f64, f64)>,
    pub model: RayleighFadingPair,
    pub p_bar: f64,
    pub realized_power: f64,
    pub dual_evaluations: usize,
    /// Whether the tabulated powers happen to be non-decreasing in h_M.
    /// Recorded only; nothing relies on it.
    pub monotone_observed: bool,
    /// Nodes that hit the per-state power cap.
    pub saturated_nodes: usize,
    #[serde(skip)]
    curve: Option<MonotoneCubic>,
}

impl MainCsiPolicy {
    pub fn power(&self, h_m: f64) -> f64 {
        if h_m <= self.cutoff {
            return 0.0;
        }
        match &self.curve {
            Some(c) => c.eval(h_m),
            None => 0.0,
        }
    }

    /// Integration breakpoints: the policy nodes clipped to `[cutoff, top]`.
    pub(crate) fn breakpoints(&self, top: f64) -> Vec<f64> {
        tabulation_breakpoints(&self.grid, top)
    }
}

pub(crate) fn tabulation_breakpoints(grid: &[(f64, f64)], top: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = grid.iter().map(|&(h, _)| h).filter(|&h| h < top).collect();
    if pts.is_empty() {
        return pts;
    }
    pts.push(top);
    pts
}

/// ∫₀^h x/(1 + xP) f_E(x) dx for an exponential eavesdropper gain.
///
/// Uses the E₁ closed form when it is well conditioned and adaptive quadrature
/// for small h·P or γ̄_E·P, where the closed form cancels.
pub fn partial_mean_gain_ratio(h: f64, p: f64, gamma_e: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Ok(0.0);
    }
    if p * h.min(gamma_e) < 1e-2 {
        let tol = Tolerance::new(1e-13, 0.0, 200)?;
        let r = integrate_1d(|x| x / (1.0 + x * p) * (-x / gamma_e).exp() / gamma_e, 0.0, h, tol)?;
        return Ok(r.value);
    }
    let b = 1.0 / gamma_e;
    let z = b / p;
    let decay = (-b * h).exp();
    let bracket = exp_integral_e1_scaled(z)? - decay * exp_integral_e1_scaled(z + b * h)?;
    Ok((-(-b * h).exp_m1() - z * bracket) / p)
}

/// ∂/∂P of the per-state secrecy rate minus λ:
/// h Pr(h_E ≤ h)/(1 + hP) − ∫₀^h x/(1 + xP) f_E(x) dx − λ.
pub fn main_csi_marginal_rate(h: f64, p: f64, lambda: f64, gamma_e: f64) -> Result<f64> {
    let below = -(-h / gamma_e).exp_m1();
    Ok(h * below / (1.0 + h * p) - partial_mean_gain_ratio(h, p, gamma_e)? - lambda)
}

/// The marginal secrecy rate at zero power, ∫₀^h (h − x) f_E(x) dx.
pub(crate) fn zero_power_marginal(h: f64, gamma_e: f64) -> f64 {
    let u = h / gamma_e;
    if u < 1e-2 {
        let u2 = u * u;
        gamma_e * u2 * (0.5 - u / 6.0 + u2 / 24.0 - u2 * u / 120.0 + u2 * u2 / 720.0 - u2 * u2 * u / 5040.0)
    } else {
        gamma_e * (u + (-u).exp_m1())
    }
}

/// Optimal power at main-channel gain `h_m` for dual variable `lambda`: the
/// positive root of the marginal rate condition, or 0 when the marginal rate
/// at zero power does not exceed λ.
///
/// ```
/// use wiretap_core::fading::RayleighFadingPair;
/// use wiretap_core::policies::main_csi_power;
/// let m = RayleighFadingPair::symmetric();
/// assert_eq!(main_csi_power(0.0, 0.1, &m).unwrap(), 0.0);
/// assert!(main_csi_power(3.0, 0.05, &m).unwrap() > 0.0);
/// ```
pub fn main_csi_power(h_m: f64, lambda: f64, model: &RayleighFadingPair) -> Result<f64> {
    Ok(state_power(h_m, lambda, model.gamma_e, f64::INFINITY)?.0)
}

/// Returns the power and whether it was clipped at `cap`.
pub(crate) fn state_power(h: f64, lambda: f64, gamma_e: f64, cap: f64) -> Result<(f64, bool)> {
    if !(lambda > 0.0) {
        return Err(Error::domain("main_csi_power", format!("lambda must be > 0, got {lambda}")));
    }
    if !(h >= 0.0) {
        return Err(Error::domain("main_csi_power", format!("gain must be >= 0, got {h}")));
    }
    if h == 0.0 || zero_power_marginal(h, gamma_e) <= lambda {
        return Ok((0.0, false));
    }
    // The root lies below 1/λ: the marginal rate is < h/(1 + hP) − λ.
    let mut hi = 1.0 / lambda;
    if cap < hi {
        if main_csi_marginal_rate(h, cap, lambda, gamma_e)? >= 0.0 {
            return Ok((cap, true));
        }
        hi = cap;
    }
    let failure = std::cell::RefCell::new(None);
    let tol = Tolerance::new(1e-12, 0.0, 300)?;
    let root = find_root_bracketed(
        |p| match main_csi_marginal_rate(h, p, lambda, gamma_e) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        hi,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((root?.x, false))
}

/// Gain at which the zero-power marginal rate equals λ.
pub(crate) fn cutoff_gain(lambda: f64, gamma_e: f64) -> Result<f64> {
    // zero_power_marginal(h) >= h − γ̄_E, so h = λ + γ̄_E brackets the root.
    let tol = Tolerance::new(1e-14, 0.0, 300)?;
    let r = find_root_bracketed(|h| zero_power_marginal(h, gamma_e) - lambda, 0.0, lambda + gamma_e, tol)?;
    Ok(r.x)
}

pub(crate) struct Table {
    pub cutoff: f64,
    pub grid: Vec<(f64, f64)>,
    pub curve: Option<MonotoneCubic>,
    pub saturated: usize,
}

fn tabulate(model: &RayleighFadingPair, lambda: f64, cap: f64, cfg: &SolverConfig) -> Result<Table> {
    let ge = model.gamma_e;
    let cutoff = cutoff_gain(lambda, ge)?;
    let lo = quantile(GRID_QUANTILES.0, model.gamma_m)?;
    let hi = quantile(GRID_QUANTILES.1, model.gamma_m)?;
    let mut gains: Vec<f64> = log_grid(lo, hi, cfg.grid_points)
        .into_iter()
        .filter(|&h| h > cutoff * (1.0 + 1e-9))
        .collect();
    if gains.is_empty() {
        gains.push(2.0 * cutoff.max(hi));
    }
    let solved: Vec<(f64, bool)> = gains
        .par_iter()
        .map(|&h| state_power(h, lambda, ge, cap))
        .collect::<Result<_>>()?;
    let saturated = solved.iter().filter(|s| s.1).count();
    let mut grid = Vec::with_capacity(gains.len() + 1);
    grid.push((cutoff, 0.0));
    grid.extend(gains.iter().zip(&solved).map(|(&h, &(p, _))| (h, p)));
    let curve = build_curve(&grid)?;
    Ok(Table { cutoff, grid, curve, saturated })
}

pub(crate) fn build_curve(grid: &[(f64, f64)]) -> Result<Option<MonotoneCubic>> {
    if grid.len() < 2 {
        return Ok(None);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid.iter().copied().unzip();
    Ok(Some(MonotoneCubic::new(xs, ys)?))
}

fn table_average_power(table: &Table, model: &RayleighFadingPair, cfg: &SolverConfig) -> Result<f64> {
    let top = quantile(cfg.tail_quantile, model.gamma_m)?;
    let pts = tabulation_breakpoints(&table.grid, top);
    let Some(curve) = &table.curve else { return Ok(0.0) };
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let gm = model.gamma_m;
    single(&pts, |h| curve.eval(h) * (-h / gm).exp() / gm, cfg)
}

/// E{P(h_M)} of the tabulated policy for a given λ.
pub fn main_csi_average_power(model: &RayleighFadingPair, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
    let table = tabulate(model, lambda, f64::INFINITY, cfg)?;
    table_average_power(&table, model, cfg)
}

/// Solves the main-channel-CSI power allocation for the budget `p_bar`.
pub fn solve_main_csi(
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    cfg: &SolverConfig,
) -> Result<MainCsiPolicy> {
    cfg.validate()?;
    let cap = cfg.p_max_factor * constraint.p_bar;
    let dual = solve_dual(
        |l| {
            let table = tabulate(model, l, cap, cfg)?;
            table_average_power(&table, model, cfg)
        },
        constraint.p_bar,
        cfg,
    )?;
    let table = tabulate(model, dual.lambda, cap, cfg)?;
    let realized_power = table_average_power(&table, model, cfg)?;
    let monotone_observed = table.grid.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(MainCsiPolicy {
        lambda: dual.lambda,
        cutoff: table.cutoff,
        grid: table.grid,
        model: *model,
        p_bar: constraint.p_bar,
        realized_power,
        dual_evaluations: dual.evaluations,
        monotone_observed,
        saturated_nodes: table.saturated,
        curve: table.curve,
    })
}
