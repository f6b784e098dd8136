//! The exponential integral E₁(x) = ∫ₓ^∞ e^{-t}/t dt for real x > 0.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Below this point the power series is used, above it the continued fraction.
const SERIES_CUTOFF: f64 = 1.0;

/// E₁(x) = ∫ₓ^∞ e^{-t}/t dt.
///
/// Saturates to exactly 0 once e^{-x} underflows (x ≳ 745).
///
/// ```
/// use wiretap_core::numerics::exp_integral_e1;
/// let v = exp_integral_e1(1.0).unwrap();
/// assert!((v - 0.219_383_934_395_520_3).abs() < 1e-15);
/// assert!(exp_integral_e1(0.0).is_err());
/// ```
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x <= SERIES_CUTOFF {
        Ok(series(x))
    } else {
        let decay = (-x).exp();
        if decay == 0.0 {
            return Ok(0.0);
        }
        Ok(decay * continued_fraction(x))
    }
}

/// The scaled form e^{x} E₁(x).
///
/// Every Rayleigh closed form multiplies E₁ by a growing exponential; this
/// keeps those products finite when the argument is large (small transmit
/// power), where e^{x} alone would overflow.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x <= SERIES_CUTOFF {
        Ok(x.exp() * series(x))
    } else {
        Ok(continued_fraction(x))
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("exp_integral_e1", format!("x must be > 0, got {x}")))
    }
}

// E₁(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
fn series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// e^{x} E₁(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))), modified Lentz.
fn continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}
