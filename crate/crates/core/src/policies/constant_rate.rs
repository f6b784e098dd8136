//! Constant-rate scheme: one codeword interleaved over all fading states.
//!
//! The objective drops the positive part inside the expectation and is not
//! concave in the policy, so only necessary KKT conditions are available. The
//! solver returns a stationary point, not a certified optimum.
//!
//! Per state, a damped fixed-point iteration on the stationarity condition is
//! started from the main-CSI power. The per-state Lagrangian can have several
//! local maxima, and at high SNR the iteration tends to settle on a poor one,
//! so its limit is compared with every other local maximizer and the best one
//! is kept. The policy can jump where two maxima trade places; such jumps are
//! located by bisection on the gain and pinned with a pair of nodes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::main_csi::{build_curve, state_power, tabulation_breakpoints};
use super::{log_grid, solve_dual, PowerConstraint};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fading::{quantile, RayleighFadingPair};
use crate::integrals::single;
use crate::numerics::{exp_integral_e1_scaled, find_root_bracketed, MonotoneCubic, Tolerance};

const GRID_QUANTILES: (f64, f64) = (1e-8, 1.0 - 1e-8);
const DAMPING: f64 = 0.5;
const MAX_FIXED_POINT_STEPS: usize = 400;
const SCAN_POINTS: usize = 128;
/// The stationarity scan covers [SCAN_FLOOR·upper, upper] log-uniformly.
const SCAN_FLOOR: f64 = 1e-12;
/// Adjacent nodes whose powers differ by more than this factor are treated as
/// straddling a jump of the policy.
const JUMP_RATIO: f64 = 2.0;
/// KKT residual below which a tabulated point counts as converged.
pub const KKT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRatePolicy {
    pub lambda: f64,
    /// Smallest main-channel gain with positive power; the policy may jump
    /// from zero to a finite level here.
    pub switch_gain: f64,
    pub grid: Vec<(f64, f64)>,
    pub model: RayleighFadingPair,
    pub p_bar: f64,
    pub realized_power: f64,
    pub converged: bool,
    /// Largest violation of stationarity (P > 0) or dual feasibility (P = 0)
    /// over the grid.
    pub kkt_residual: f64,
    pub dual_evaluations: usize,
    /// Nodes where the damped iteration stalled and the bracketing fallback
    /// located the stationary point.
    pub fallback_nodes: usize,
    /// Nodes where a different local maximizer of the per-state Lagrangian
    /// beat the point the damped iteration converged to.
    pub reselected_nodes: usize,
    #[serde(skip)]
    curve: Option<MonotoneCubic>,
}

impl ConstantRatePolicy {
    pub fn power(&self, h_m: f64) -> f64 {
        if !(h_m >= self.switch_gain) {
            return 0.0;
        }
        self.curve.as_ref().map_or(0.0, |c| c.eval(h_m))
    }

    pub(crate) fn breakpoints(&self, top: f64) -> Vec<f64> {
        tabulation_breakpoints(&self.grid, top)
    }

    /// A policy with the given table and no solver history; used for
    /// evaluating hand-built policies.
    pub fn from_table(model: RayleighFadingPair, p_bar: f64, grid: Vec<(f64, f64)>) -> Result<Self> {
        let switch_gain = grid
            .iter()
            .find(|&&(_, p)| p > 0.0)
            .map_or(f64::INFINITY, |&(h, _)| h);
        let grid: Vec<(f64, f64)> = grid.into_iter().filter(|&(h, _)| h >= switch_gain).collect();
        let curve = build_curve(&grid)?;
        Ok(ConstantRatePolicy {
            lambda: f64::NAN,
            switch_gain,
            grid,
            model,
            p_bar,
            realized_power: f64::NAN,
            converged: false,
            kkt_residual: f64::NAN,
            dual_evaluations: 0,
            fallback_nodes: 0,
            reselected_nodes: 0,
            curve,
        })
    }
}

/// E[x/(1 + xP)] over an exponential eavesdropper gain with mean `gamma_e`.
pub fn mean_gain_ratio(p: f64, gamma_e: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(Error::domain("mean_gain_ratio", format!("power must be >= 0, got {p}")));
    }
    if p == 0.0 {
        return Ok(gamma_e);
    }
    let z = 1.0 / (gamma_e * p);
    if z >= 50.0 {
        // 1 − z e^z E₁(z) ~ Σ_{k≥1} (−1)^{k+1} k!/z^k
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= -((k + 1) as f64) / z;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        return Ok(gamma_e * sum);
    }
    Ok((1.0 - z * exp_integral_e1_scaled(z)?) / p)
}

/// h/(1 + hP) − E[x/(1 + xP)] − λ.
fn stationarity(h: f64, p: f64, lambda: f64, gamma_e: f64) -> Result<f64> {
    Ok(h / (1.0 + h * p) - mean_gain_ratio(p, gamma_e)? - lambda)
}

fn kkt_residual(h: f64, p: f64, lambda: f64, gamma_e: f64) -> Result<f64> {
    let s = stationarity(h, p, lambda, gamma_e)?;
    Ok(if p > 0.0 { s.abs() } else { s.max(0.0) })
}

#[derive(Debug, Clone, Copy)]
struct StateSolution {
    power: f64,
    residual: f64,
    fallback: bool,
    /// A stationary point other than the iterate's limit was selected.
    reselected: bool,
}

/// Damped projected fixed-point iteration P ← ½P + ½[1/(λ + E[x/(1+xP)]) − 1/h]⁺
/// started from `start`.
///
/// The update map is increasing in P, so the iterates move monotonically to the
/// nearest fixed point in the direction of travel. When the iteration stalls
/// (slope near one, close to a fold of the stationarity curve) the same fixed
/// point is located by scanning toward it and bisecting.
fn solve_state(h: f64, lambda: f64, gamma_e: f64, start: f64) -> Result<StateSolution> {
    if !(h > 0.0) {
        return Ok(StateSolution { power: 0.0, residual: 0.0, fallback: false, reselected: false });
    }
    let update = |p: f64| -> Result<f64> {
        let target = 1.0 / (lambda + mean_gain_ratio(p, gamma_e)?) - 1.0 / h;
        Ok(target.max(0.0))
    };
    let mut p = start.max(0.0);
    for _ in 0..MAX_FIXED_POINT_STEPS {
        let next = DAMPING * p + (1.0 - DAMPING) * update(p)?;
        let step = (next - p).abs();
        p = next;
        if step <= 1e-14 * p || (p == 0.0 && update(0.0)? == 0.0) {
            break;
        }
    }
    let residual = kkt_residual(h, p, lambda, gamma_e)?;
    if residual <= 1e-12 {
        return Ok(StateSolution { power: p, residual, fallback: false, reselected: false });
    }

    let phi = |x: f64| stationarity(h, x, lambda, gamma_e);
    let descending = phi(p)? < 0.0;
    // Scan from p toward the fixed point for the first sign change.
    let (far, near) = if descending {
        let mut prev = p;
        let mut found = None;
        for j in 1..=SCAN_POINTS {
            let x = p * (1.0 - j as f64 / SCAN_POINTS as f64);
            if phi(x)? >= 0.0 {
                found = Some((x, prev));
                break;
            }
            prev = x;
        }
        match found {
            Some(pair) => pair,
            None => {
                return Ok(StateSolution {
                    power: 0.0,
                    residual: kkt_residual(h, 0.0, lambda, gamma_e)?,
                    fallback: true,
                    reselected: false,
                })
            }
        }
    } else {
        // φ(1/λ) < 0, so the scan always ends with a sign change.
        let top = 1.0 / lambda;
        let mut prev = p;
        let mut found = (p, top);
        for j in 1..=SCAN_POINTS {
            let x = p + (top - p) * j as f64 / SCAN_POINTS as f64;
            if phi(x)? <= 0.0 {
                found = (prev, x);
                break;
            }
            prev = x;
        }
        found
    };
    let failure = std::cell::RefCell::new(None);
    let tol = Tolerance::new(1e-13, 0.0, 300)?;
    let root = find_root_bracketed(
        |x| match phi(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        far.min(near),
        far.max(near),
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let power = root?.x;
    Ok(StateSolution {
        power,
        residual: kkt_residual(h, power, lambda, gamma_e)?,
        fallback: true,
        reselected: false,
    })
}

/// Per-state Lagrangian ln(1 + hP) − E ln(1 + xP) − λP.
fn lagrangian(h: f64, p: f64, lambda: f64, gamma_e: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    Ok((h * p).ln_1p() - exp_integral_e1_scaled(1.0 / (gamma_e * p))? - lambda * p)
}

/// All local maximizers of the per-state Lagrangian on [0, upper]: zero when
/// the marginal there is non-positive, every down-crossing of the
/// stationarity function on a log-spaced scan, and `upper` itself when the
/// marginal is still positive there.
fn local_maxima(h: f64, lambda: f64, gamma_e: f64, upper: f64) -> Result<Vec<f64>> {
    let phi = |x: f64| stationarity(h, x, lambda, gamma_e);
    let mut out = Vec::new();
    if phi(0.0)? <= 0.0 {
        out.push(0.0);
    }
    let lo = upper * SCAN_FLOOR;
    let ratio = (upper / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let mut prev = (lo, phi(lo)?);
    for k in 1..SCAN_POINTS {
        let x = if k == SCAN_POINTS - 1 { upper } else { lo * ratio.powi(k as i32) };
        let v = phi(x)?;
        if prev.1 > 0.0 && v <= 0.0 {
            out.push(refine_root(&phi, prev.0, x)?);
        }
        prev = (x, v);
    }
    if prev.1 > 0.0 {
        out.push(upper);
    }
    Ok(out)
}

fn refine_root<F>(phi: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure = std::cell::RefCell::new(None);
    let tol = Tolerance::new(1e-13, 0.0, 300)?;
    let root = find_root_bracketed(
        |x| match phi(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(root?.x)
}

/// Per-state solution: the damped iteration started from the main-CSI power
/// at the same λ, then compared against the other local maximizers of the
/// per-state Lagrangian. The candidate with the largest Lagrangian value wins;
/// the iterate is kept on ties.
fn solve_node(h: f64, lambda: f64, gamma_e: f64, cap: f64) -> Result<StateSolution> {
    let (start, _) = state_power(h, lambda, gamma_e, cap)?;
    let mut s = solve_state(h, lambda, gamma_e, start)?;
    if s.power > cap {
        s.power = cap;
    }
    if h > 0.0 {
        // φ(1/λ) < 0, so every maximizer lies below 1/λ.
        let upper = cap.min(1.0 / lambda);
        let mut best = lagrangian(h, s.power, lambda, gamma_e)?;
        for p in local_maxima(h, lambda, gamma_e, upper)? {
            let v = lagrangian(h, p, lambda, gamma_e)?;
            if v > best + 1e-14 * best.abs().max(1e-300) {
                best = v;
                s.power = p;
                s.reselected = true;
            }
        }
    }
    s.residual = kkt_residual(h, s.power, lambda, gamma_e)?;
    Ok(s)
}

struct Table {
    switch_gain: f64,
    grid: Vec<(f64, f64)>,
    curve: Option<MonotoneCubic>,
    residual: f64,
    fallback: usize,
    reselected: usize,
}

/// Narrows a jump of the policy between gains `a` and `b` down to a bracket
/// of relative width 1e-12 and returns its two ends.
fn locate_jump(
    (mut a, mut at_a): (f64, StateSolution),
    (mut b, mut at_b): (f64, StateSolution),
    lambda: f64,
    gamma_e: f64,
    cap: f64,
) -> Result<((f64, StateSolution), (f64, StateSolution))> {
    let split = if at_a.power > 0.0 { (at_a.power * at_b.power).sqrt() } else { 0.0 };
    for _ in 0..60 {
        if b - a <= 1e-12 * b {
            break;
        }
        let m = 0.5 * (a + b);
        let s = solve_node(m, lambda, gamma_e, cap)?;
        if s.power > split {
            (b, at_b) = (m, s);
        } else {
            (a, at_a) = (m, s);
        }
    }
    Ok(((a, at_a), (b, at_b)))
}

fn is_jump(lo: f64, hi: f64) -> bool {
    (lo == 0.0 && hi > 0.0) || hi > JUMP_RATIO * lo
}

fn tabulate(model: &RayleighFadingPair, lambda: f64, cap: f64, cfg: &SolverConfig) -> Result<Table> {
    let ge = model.gamma_e;
    let lo = quantile(GRID_QUANTILES.0, model.gamma_m)?;
    let hi = quantile(GRID_QUANTILES.1, model.gamma_m)?;
    let gains = log_grid(lo, hi, cfg.grid_points);
    let solved: Vec<StateSolution> = gains
        .par_iter()
        .map(|&h| solve_node(h, lambda, ge, cap))
        .collect::<Result<_>>()?;

    let Some(first) = solved.iter().position(|s| s.power > 0.0) else {
        return Ok(Table {
            switch_gain: f64::INFINITY,
            grid: Vec::new(),
            curve: None,
            residual: solved.iter().fold(0.0f64, |m, s| m.max(s.residual)),
            fallback: solved.iter().filter(|s| s.fallback).count(),
            reselected: solved.iter().filter(|s| s.reselected).count(),
        });
    };
    // Nodes from the first positive one on, with each jump of the policy
    // pinned down by a pair of nodes straddling it.
    let mut nodes: Vec<(f64, StateSolution)> = Vec::with_capacity(gains.len() + 8);
    if first > 0 {
        let (_, b) = locate_jump((gains[first - 1], solved[first - 1]), (gains[first], solved[first]), lambda, ge, cap)?;
        if b.0 < gains[first] {
            nodes.push(b);
        }
    }
    nodes.push((gains[first], solved[first]));
    for i in first + 1..gains.len() {
        let prev = (gains[i - 1], solved[i - 1]);
        let next = (gains[i], solved[i]);
        if is_jump(prev.1.power, next.1.power) {
            let (a, b) = locate_jump(prev, next, lambda, ge, cap)?;
            for node in [a, b] {
                if node.0 > nodes.last().map_or(f64::NEG_INFINITY, |n| n.0) && node.0 < next.0 {
                    nodes.push(node);
                }
            }
        }
        nodes.push(next);
    }
    let residual = nodes.iter().fold(0.0f64, |m, (_, s)| m.max(s.residual));
    let fallback = nodes.iter().filter(|(_, s)| s.fallback).count();
    let reselected = nodes.iter().filter(|(_, s)| s.reselected).count();
    let grid: Vec<(f64, f64)> = nodes.iter().map(|&(h, s)| (h, s.power)).collect();
    let switch_gain = grid[0].0;
    let curve = build_curve(&grid)?;
    Ok(Table { switch_gain, grid, curve, residual, fallback, reselected })
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

/// Finds a KKT point of the constant-rate problem meeting E{P} = p_bar.
///
/// Failure of the dual search to converge is reported through
/// `converged = false` together with the best λ found, not as an error.
pub fn solve_constant_rate(
    model: &RayleighFadingPair,
    constraint: &PowerConstraint,
    cfg: &SolverConfig,
) -> Result<ConstantRatePolicy> {
    cfg.validate()?;
    let cap = cfg.p_max_factor * constraint.p_bar;
    let dual = solve_dual(
        |l| {
            let t = tabulate(model, l, cap, cfg)?;
            table_average_power(&t, model, cfg)
        },
        constraint.p_bar,
        cfg,
    );
    let (lambda, dual_ok, dual_evaluations) = match dual {
        Ok(d) => (d.lambda, true, d.evaluations),
        Err(Error::NoConvergence { estimate, iterations, .. }) if estimate > 0.0 => (estimate, false, iterations),
        Err(e) => return Err(e),
    };
    let table = tabulate(model, lambda, cap, cfg)?;
    let realized_power = table_average_power(&table, model, cfg)?;
    let attained = (realized_power / constraint.p_bar - 1.0).abs() <= 1e-4;
    Ok(ConstantRatePolicy {
        lambda,
        switch_gain: table.switch_gain,
        grid: table.grid,
        model: *model,
        p_bar: constraint.p_bar,
        realized_power,
        converged: dual_ok && attained && table.residual <= KKT_TOLERANCE,
        kkt_residual: table.residual,
        dual_evaluations,
        fallback_nodes: table.fallback,
        reselected_nodes: table.reselected,
        curve: table.curve,
    })
}
