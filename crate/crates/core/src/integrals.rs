//! Iterated integrals over the (h_M, h_E) plane built from `integrate_1d`.

use std::cell::RefCell;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, integrate_breakpoints};

/// ∫_{outer pieces} ∫_{inner(x)} f(x, y) dy dx.
///
/// `outer_points` are breakpoints of the outer variable; `inner` returns the
/// inner limits for a given outer value, or `None` when the inner range is
/// empty. Inner integrals use the tighter nested tolerance of `cfg`.
pub(crate) fn nested<FI, F>(outer_points: &[f64], inner: FI, f: F, cfg: &SolverConfig) -> Result<f64>
where
    FI: Fn(f64) -> Option<(f64, f64)>,
    F: Fn(f64, f64) -> f64,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_tol = cfg.inner_quad_tol();
    let outer_fn = |x: f64| -> f64 {
        let Some((c, d)) = inner(x) else { return 0.0 };
        if !(d > c) {
            return 0.0;
        }
        match integrate_1d(|y| f(x, y), c, d, inner_tol) {
            Ok(r) => r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_breakpoints(outer_fn, outer_points, cfg.quad_tol());
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result?.value)
}

/// Single integral over breakpoints with the configured tolerance.
pub(crate) fn single<F>(points: &[f64], f: F, cfg: &SolverConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(integrate_breakpoints(f, points, cfg.quad_tol())?.value)
}

/// Breakpoints `[lo, hi]` with a few extra points spread geometrically so
/// that the adaptive rule starts on sensibly sized pieces of a long
/// exponentially decaying range.
pub(crate) fn decay_breakpoints(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    for k in [0.25, 1.0, 3.0, 8.0] {
        let p = lo + k * scale;
        if p < hi {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}
