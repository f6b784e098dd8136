use super::Tolerance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub f_x: f64,
    pub iterations: usize,
}

/// Finds a zero of `f` in `[lo, hi]` given a sign change.
///
/// Regula falsi with the Illinois weighting, falling back to a bisection step
/// whenever an interpolation step fails to halve the bracket. Stops when
/// `|f(x)| <= tol.abs` or the bracket is narrower than `tol.rel·|x|`.
///
/// ```
/// use wiretap_core::numerics::{find_root_bracketed, Tolerance};
/// let r = find_root_bracketed(|x: f64| (-x).exp() - 0.5, 0.0, 10.0, Tolerance::default()).unwrap();
/// assert!((r.x - std::f64::consts::LN_2).abs() < 1e-9);
/// ```
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = checked(&f, a)?;
    let mut fb = checked(&f, b)?;
    if fa == 0.0 {
        return Ok(Root { x: a, f_x: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, f_x: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }

    // Illinois weights on the stale endpoint values.
    let (mut wa, mut wb) = (1.0, 1.0);
    let mut last_moved = 0i8;
    let mut force_bisect = false;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for iteration in 1..=tol.max_iter {
        let width = b - a;
        let (ga, gb) = (wa * fa, wb * fb);
        let interpolated = (a * gb - b * ga) / (gb - ga);
        let x = if !force_bisect && interpolated.is_finite() && interpolated > a && interpolated < b {
            interpolated
        } else {
            0.5 * (a + b)
        };
        let fx = checked(&f, x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= tol.abs {
            return Ok(Root { x, f_x: fx, iterations: iteration });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            wa = 1.0;
            if last_moved == -1 {
                wb *= 0.5;
            }
            last_moved = -1;
        } else {
            b = x;
            fb = fx;
            wb = 1.0;
            if last_moved == 1 {
                wa *= 0.5;
            }
            last_moved = 1;
        }
        force_bisect = b - a > 0.5 * width;
        let mid = 0.5 * (a + b);
        if b - a <= tol.rel * mid.abs() || b - a <= f64::EPSILON * mid.abs() {
            let (x, f_x) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
            return Ok(Root { x, f_x, iterations: iteration });
        }
    }
    Err(Error::NoConvergence {
        what: "find_root_bracketed",
        iterations: tol.max_iter,
        estimate: best.0,
        error_bound: b - a,
    })
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_nan() {
        Err(Error::NonFinite { what: "root function", x, value: y })
    } else {
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear() {
        let r = find_root_bracketed(|x| x - 2.0, 0.0, 5.0, Tolerance::default()).unwrap();
        assert!((r.x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_bracket_error() {
        let err = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn reversed_bracket_and_endpoint_roots() {
        let r = find_root_bracketed(|x| x - 2.0, 5.0, 0.0, Tolerance::default()).unwrap();
        assert!((r.x - 2.0).abs() < 1e-12);
        let r = find_root_bracketed(|x| x, 0.0, 1.0, Tolerance::default()).unwrap();
        assert_eq!(r.x, 0.0);
    }

    #[test]
    fn steep_function_converges() {
        // regula falsi alone stalls on this one
        let tol = Tolerance::new(1e-14, 0.0, 200).unwrap();
        let r = find_root_bracketed(|x: f64| x.powi(9) - 1e-9, 0.0, 4.0, tol).unwrap();
        assert!((r.x - 0.1).abs() < 1e-12, "{r:?}");
    }
}
