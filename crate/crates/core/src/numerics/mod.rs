//! Special functions and generic numerical primitives shared by the solvers.

mod e1;
mod interp;
mod optimize;
mod quad;
mod roots;

pub use e1::{exp_integral_e1, exp_integral_e1_scaled, EULER_GAMMA};
pub use interp::MonotoneCubic;
pub use optimize::{maximize_scalar, Maximum};
pub use quad::{integrate_1d, integrate_breakpoints, Integral, ROUNDOFF_REL};
pub use roots::{find_root_bracketed, Root};

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self> {
        // `!(x > 0)` also rejects NaN.
        if !(rel > 0.0) || !rel.is_finite() {
            return Err(Error::Config(format!("relative tolerance must be > 0, got {rel}")));
        }
        if !(abs >= 0.0) || !abs.is_finite() {
            return Err(Error::Config(format!("absolute tolerance must be >= 0, got {abs}")));
        }
        if max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(Tolerance { rel, abs, max_iter })
    }

    pub fn with_abs(self, abs: f64) -> Self {
        Tolerance { abs, ..self }
    }

    pub fn with_rel(self, rel: f64) -> Self {
        Tolerance { rel, ..self }
    }

    pub fn with_max_iter(self, max_iter: usize) -> Self {
        Tolerance { max_iter, ..self }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs: 1e-14,
            max_iter: 200,
        }
    }
}
