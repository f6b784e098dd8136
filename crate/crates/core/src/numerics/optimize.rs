use super::Tolerance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

const GRID_POINTS: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` on `[lo, hi]`.
///
/// A uniform scan of 65 points (both endpoints included) picks the best grid
/// point; golden-section search then refines inside its two neighbouring grid
/// cells. Ties go to the smaller abscissa, so a constant function returns `lo`.
/// The result is never worse than the best grid point.
///
/// ```
/// use wiretap_core::numerics::{maximize_scalar, Tolerance};
/// let m = maximize_scalar(|x: f64| -(x - 1.0).powi(2), 0.0, 3.0, Tolerance::default()).unwrap();
/// assert!((m.x - 1.0).abs() < 1e-6 && m.value.abs() < 1e-12);
/// ```
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("maximize_scalar", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { what: "objective", x, value: y })
        }
    };

    let step = (hi - lo) / GRID_POINTS as f64;
    let grid_x = |i: usize| if i == GRID_POINTS { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best = eval(lo)?;
    for i in 1..=GRID_POINTS {
        let y = eval(grid_x(i))?;
        if y > best {
            best = y;
            best_i = i;
        }
    }

    let mut a = grid_x(best_i.saturating_sub(1));
    let mut b = grid_x((best_i + 1).min(GRID_POINTS));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..tol.max_iter {
        if (b - a).abs() <= tol.abs + tol.rel * (0.5 * (a + b)).abs() {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    if value > best {
        Ok(Maximum { x, value })
    } else {
        Ok(Maximum { x: grid_x(best_i), value: best })
    }
}
