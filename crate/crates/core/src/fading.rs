//! Rayleigh block fading: exponential power gains for the main and
//! eavesdropper channels, independent of each other and across coherence
//! intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of an instantaneous channel power gain.
pub trait GainDistribution {
    fn mean(&self) -> f64;
    fn pdf(&self, gain: f64) -> Result<f64>;
    fn cdf(&self, gain: f64) -> Result<f64>;
    /// Upper tail Pr(h > gain), computed without cancellation.
    fn sf(&self, gain: f64) -> Result<f64>;
    fn quantile(&self, p: f64) -> Result<f64>;
}

/// Exponential power gain with the given mean (Rayleigh amplitude fading).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialGain {
    mean: f64,
}

impl ExponentialGain {
    pub fn new(mean: f64) -> Result<Self> {
        if mean > 0.0 && mean.is_finite() {
            Ok(ExponentialGain { mean })
        } else {
            Err(Error::domain("ExponentialGain", format!("mean must be positive and finite, got {mean}")))
        }
    }
}

impl GainDistribution for ExponentialGain {
    fn mean(&self) -> f64 {
        self.mean
    }

    fn pdf(&self, gain: f64) -> Result<f64> {
        pdf(gain, self.mean)
    }

    fn cdf(&self, gain: f64) -> Result<f64> {
        cdf(gain, self.mean)
    }

    fn sf(&self, gain: f64) -> Result<f64> {
        check_gain(gain)?;
        Ok((-gain / self.mean).exp())
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        quantile(p, self.mean)
    }
}

/// Exponential density (1/γ)·e^{-gain/γ}.
pub fn pdf(gain: f64, gamma: f64) -> Result<f64> {
    check_gain(gain)?;
    check_gamma(gamma)?;
    Ok((-gain / gamma).exp() / gamma)
}

pub fn cdf(gain: f64, gamma: f64) -> Result<f64> {
    check_gain(gain)?;
    check_gamma(gamma)?;
    Ok(-(-gain / gamma).exp_m1())
}

/// Inverse of [`cdf`]: −γ·ln(1 − p).
pub fn quantile(p: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain("quantile", format!("p must lie in [0, 1), got {p}")));
    }
    Ok(-gamma * (-p).ln_1p())
}

fn check_gain(gain: f64) -> Result<()> {
    if gain >= 0.0 && !gain.is_nan() {
        Ok(())
    } else {
        Err(Error::domain("fading", format!("power gain must be >= 0, got {gain}")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("fading", format!("mean gain must be > 0, got {gamma}")))
    }
}

/// Mean power gains (γ̄_M, γ̄_E) of the main and eavesdropper channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighFadingPair {
    pub gamma_m: f64,
    pub gamma_e: f64,
}

impl RayleighFadingPair {
    pub fn new(gamma_m: f64, gamma_e: f64) -> Result<Self> {
        check_gamma(gamma_m)?;
        check_gamma(gamma_e)?;
        Ok(RayleighFadingPair { gamma_m, gamma_e })
    }

    /// γ̄_M = γ̄_E = 1.
    pub fn symmetric() -> Self {
        RayleighFadingPair { gamma_m: 1.0, gamma_e: 1.0 }
    }

    pub fn main(&self) -> ExponentialGain {
        ExponentialGain { mean: self.gamma_m }
    }

    pub fn eavesdropper(&self) -> ExponentialGain {
        ExponentialGain { mean: self.gamma_e }
    }

    /// Pr(h_M > h_E) = γ̄_M / (γ̄_M + γ̄_E).
    pub fn prob_main_stronger(&self) -> f64 {
        self.gamma_m / (self.gamma_m + self.gamma_e)
    }
}

/// One coherence interval's power gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub h_m: f64,
    pub h_e: f64,
}

impl ChannelState {
    pub fn new(h_m: f64, h_e: f64) -> Result<Self> {
        check_gain(h_m)?;
        check_gain(h_e)?;
        if !h_m.is_finite() || !h_e.is_finite() {
            return Err(Error::domain("ChannelState", "gains must be finite"));
        }
        Ok(ChannelState { h_m, h_e })
    }
}

/// Seeded i.i.d. generator of channel states.
///
/// `stream` selects an independent ChaCha stream for the same seed, which is
/// how parallel Monte Carlo tasks get non-overlapping draws.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    model: RayleighFadingPair,
    rng: ChaCha8Rng,
}

impl FadingSampler {
    pub fn new(model: RayleighFadingPair, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        FadingSampler { model, rng }
    }

    pub fn next_state(&mut self) -> ChannelState {
        let a: f64 = self.rng.sample(Exp1);
        let b: f64 = self.rng.sample(Exp1);
        ChannelState {
            h_m: a * self.model.gamma_m,
            h_e: b * self.model.gamma_e,
        }
    }
}

impl Iterator for FadingSampler {
    type Item = ChannelState;

    fn next(&mut self) -> Option<ChannelState> {
        Some(self.next_state())
    }
}

/// `n` independent channel states drawn from stream 0 of `seed`.
pub fn sample(model: RayleighFadingPair, seed: u64, n: usize) -> Result<Vec<ChannelState>> {
    if n == 0 {
        return Err(Error::domain("sample", "need at least one draw"));
    }
    Ok(FadingSampler::new(model, seed, 0).take(n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert_eq!(pdf(0.0, 1.0).unwrap(), 1.0);
        assert!((pdf(2.0, 2.0).unwrap() - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(pdf(-1.0, 1.0).is_err());
        assert!(pdf(1.0, 0.0).is_err());
    }

    #[test]
    fn cdf_and_quantile() {
        assert!((cdf(3.0, 3.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert_eq!(quantile(0.0, 2.0).unwrap(), 0.0);
        assert!((quantile(1.0 - 1e-6, 1.0).unwrap() - 13.815_510_557_964_274).abs() < 1e-9);
        assert!(quantile(1.0, 1.0).is_err());
        assert!(quantile(-0.1, 1.0).is_err());
    }

    #[test]
    fn sf_matches_cdf_complement() {
        let g = ExponentialGain::new(2.0).unwrap();
        let x = 1.3;
        assert!((g.sf(x).unwrap() + g.cdf(x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_samples_reproduce() {
        let m = RayleighFadingPair::new(1.0, 2.0).unwrap();
        assert_eq!(sample(m, 7, 100).unwrap(), sample(m, 7, 100).unwrap());
        assert_ne!(sample(m, 7, 100).unwrap(), sample(m, 8, 100).unwrap());
        assert!(sample(m, 7, 0).is_err());
    }

    #[test]
    fn streams_differ() {
        let m = RayleighFadingPair::symmetric();
        let a: Vec<_> = FadingSampler::new(m, 1, 0).take(4).collect();
        let b: Vec<_> = FadingSampler::new(m, 1, 1).take(4).collect();
        assert_ne!(a, b);
    }
}
