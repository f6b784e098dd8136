//! Solver configuration: tolerances, grid sizes, truncation and Monte Carlo
//! settings. Loaded from a flat TOML document; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tolerance;

/// Unit used when presenting rates. All computation is in nats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnit {
    #[default]
    Nats,
    Bits,
}

impl RateUnit {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            RateUnit::Nats => nats,
            RateUnit::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateUnit::Nats => "nats",
            RateUnit::Bits => "bits",
        }
    }
}

impl std::str::FromStr for RateUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(RateUnit::Nats),
            "bits" => Ok(RateUnit::Bits),
            other => Err(Error::Config(format!("unknown unit '{other}' (expected nats or bits)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    /// Subdivision budget for each adaptive integral.
    pub quad_max_subdivisions: usize,
    /// Relative accuracy of the dual variable; the power constraint itself is
    /// met to `lambda_tol / 10` relative.
    pub lambda_tol: f64,
    /// Nodes of the tabulated main-channel policies.
    pub grid_points: usize,
    /// Semi-infinite fading integrals are truncated at this quantile.
    pub tail_quantile: f64,
    /// Per-state power search is capped at `p_max_factor · p_bar`.
    pub p_max_factor: f64,
    pub mc_samples: usize,
    pub mc_seed: u64,
    /// Number of independent RNG streams a Monte Carlo run is split into.
    /// Results depend on this value, not on the thread count.
    pub mc_streams: usize,
    pub unit: RateUnit,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            quad_rel_tol: 1e-8,
            quad_abs_tol: 1e-12,
            quad_max_subdivisions: 2000,
            lambda_tol: 1e-6,
            grid_points: 512,
            tail_quantile: 1.0 - 1e-10,
            p_max_factor: 1e6,
            mc_samples: 1_000_000,
            mc_seed: 42,
            mc_streams: 16,
            unit: RateUnit::Nats,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let unit_interval = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit_interval("quad_rel_tol", self.quad_rel_tol)?;
        unit_interval("lambda_tol", self.lambda_tol)?;
        unit_interval("tail_quantile", self.tail_quantile)?;
        if !(self.quad_abs_tol > 0.0 && self.quad_abs_tol.is_finite()) {
            return Err(Error::Config(format!("quad_abs_tol must be > 0, got {}", self.quad_abs_tol)));
        }
        if self.quad_max_subdivisions == 0 {
            return Err(Error::Config("quad_max_subdivisions must be >= 1".into()));
        }
        if self.grid_points < 16 {
            return Err(Error::Config(format!("grid_points must be >= 16, got {}", self.grid_points)));
        }
        if !(self.p_max_factor > 1.0 && self.p_max_factor.is_finite()) {
            return Err(Error::Config(format!("p_max_factor must be > 1, got {}", self.p_max_factor)));
        }
        if self.mc_samples == 0 || self.mc_streams == 0 {
            return Err(Error::Config("mc_samples and mc_streams must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SolverConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn quad_tol(&self) -> Tolerance {
        Tolerance {
            rel: self.quad_rel_tol,
            abs: self.quad_abs_tol,
            max_iter: self.quad_max_subdivisions,
        }
    }

    /// Tolerance for integrals nested inside another integral.
    pub(crate) fn inner_quad_tol(&self) -> Tolerance {
        let t = self.quad_tol();
        t.with_rel(t.rel * 0.1).with_abs(t.abs * 0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_absurd_tolerance() {
        let cfg = SolverConfig { quad_rel_tol: 10.0, ..SolverConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = SolverConfig { grid_points: 8, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { tail_quantile: 1.0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_partial_toml() {
        let cfg = SolverConfig::from_toml_str("grid_points = 256\nunit = \"bits\"\nmc_seed = 7\n").unwrap();
        assert_eq!(cfg.grid_points, 256);
        assert_eq!(cfg.unit, RateUnit::Bits);
        assert_eq!(cfg.mc_seed, 7);
        assert_eq!(cfg.quad_rel_tol, 1e-8);
        assert!(SolverConfig::from_toml_str("no_such_key = 1").is_err());
        assert!(SolverConfig::from_toml_str("quad_rel_tol = 10.0").is_err());
    }

    #[test]
    fn bits_conversion() {
        assert_eq!(RateUnit::Bits.convert(std::f64::consts::LN_2), 1.0);
        assert_eq!(RateUnit::Nats.convert(0.3), 0.3);
    }
}
