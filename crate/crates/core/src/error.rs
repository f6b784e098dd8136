use thiserror::Error;

/// Errors raised by the solvers and numerical primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A bracketed root search was started on an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An iterative method ran out of budget. Carries the best estimate so far.
    #[error("{what} did not converge after {iterations} iterations (estimate {estimate}, error bound {error_bound})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
        error_bound: f64,
    },

    /// A function returned a NaN or infinite value where a finite one was required.
    #[error("non-finite value {value} at x = {x} in {what}")]
    NonFinite { what: &'static str, x: f64, value: f64 },

    /// Two evaluation routes of the same quantity disagree.
    #[error("internal consistency check failed for {what}: {a} vs {b} (relative gap {rel_gap:.3e})")]
    Consistency {
        what: &'static str,
        a: f64,
        b: f64,
        rel_gap: f64,
    },

    /// Invalid configuration or parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative method to converge. The CLI maps these
    /// to their own exit status.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::Bracket { .. } | Error::Consistency { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
