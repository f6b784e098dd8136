use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{ChannelState, FadingSampler, RayleighFadingPair};
use crate::policies::{ConstantRatePolicy, FullCsiPolicy, MainCsiPolicy, OnOffPolicy};
use crate::scheme::Scheme;

/// Smallest sample count accepted by [`mc_rate`].
pub const MIN_SAMPLES: usize = 1000;

/// A solved policy together with the per-state rate expression of its scheme.
#[derive(Debug, Clone)]
pub enum SchemePolicy {
    FullCsi(FullCsiPolicy),
    MainCsi(MainCsiPolicy),
    Onoff(OnOffPolicy),
    ConstantRate(ConstantRatePolicy),
    /// Constant power `p_bar` in every state.
    ReceiverOnly { p_bar: f64 },
    /// Never transmit.
    Zero,
}

impl SchemePolicy {
    pub fn scheme(&self) -> Option<Scheme> {
        match self {
            SchemePolicy::FullCsi(_) => Some(Scheme::FullCsi),
            SchemePolicy::MainCsi(_) => Some(Scheme::MainCsi),
            SchemePolicy::Onoff(_) => Some(Scheme::Onoff),
            SchemePolicy::ConstantRate(_) => Some(Scheme::ConstantRate),
            SchemePolicy::ReceiverOnly { .. } => Some(Scheme::ReceiverOnly),
            SchemePolicy::Zero => None,
        }
    }

    pub fn power(&self, s: ChannelState) -> f64 {
        match self {
            SchemePolicy::FullCsi(p) => p.power(s.h_m, s.h_e),
            SchemePolicy::MainCsi(p) => p.power(s.h_m),
            SchemePolicy::Onoff(p) => p.power(s.h_m),
            SchemePolicy::ConstantRate(p) => p.power(s.h_m),
            SchemePolicy::ReceiverOnly { p_bar } => *p_bar,
            SchemePolicy::Zero => 0.0,
        }
    }

    /// True when the positive part is taken after averaging, so the per-state
    /// sample is the signed difference.
    pub fn averages_signed_rate(&self) -> bool {
        matches!(self, SchemePolicy::ConstantRate(_) | SchemePolicy::ReceiverOnly { .. })
    }

    fn state_rate(&self, s: ChannelState, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let d = (s.h_m * p).ln_1p() - (s.h_e * p).ln_1p();
        if self.averages_signed_rate() {
            d
        } else {
            d.max(0.0)
        }
    }
}

/// Monte Carlo estimate of a scheme's rate.
///
/// For schemes that take the positive part after averaging (constant-rate,
/// receiver-only) `mean` is the signed average; see [`McEstimate::rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
    pub seed: u64,
    pub mean_power: f64,
}

impl McEstimate {
    pub fn rate(&self) -> f64 {
        self.mean.max(0.0)
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    power: f64,
}

impl Moments {
    fn push(&mut self, x: f64, p: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
        self.power += p;
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
            power: self.power + other.power,
        }
    }
}

/// Estimates the rate of `policy` from `n` fading draws.
///
/// The draws are split into `streams` chunks, each with its own RNG stream of
/// `seed`; chunks run in parallel and are merged in stream order, so the
/// result depends only on `(n, seed, streams)`.
///
/// ```
/// use wiretap_core::fading::RayleighFadingPair;
/// use wiretap_core::validation::{mc_rate, SchemePolicy};
/// let est = mc_rate(&SchemePolicy::Zero, &RayleighFadingPair::symmetric(), 1000, 7, 4).unwrap();
/// assert_eq!((est.mean, est.std_err), (0.0, 0.0));
/// ```
pub fn mc_rate(
    policy: &SchemePolicy,
    model: &RayleighFadingPair,
    n: usize,
    seed: u64,
    streams: usize,
) -> Result<McEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::domain("mc_rate", format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    if streams == 0 {
        return Err(Error::domain("mc_rate", "streams must be >= 1"));
    }
    let streams = streams.min(n);
    let base = n / streams;
    let extra = n % streams;
    let chunks: Vec<Moments> = (0..streams)
        .into_par_iter()
        .map(|k| {
            let len = base + usize::from(k < extra);
            let mut sampler = FadingSampler::new(*model, seed, k as u64);
            let mut m = Moments::default();
            for _ in 0..len {
                let s = sampler.next_state();
                let p = policy.power(s);
                m.push(policy.state_rate(s, p), p);
            }
            m
        })
        .collect();
    let total = chunks.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: total.mean,
        std_err: (var / total.n).sqrt(),
        n,
        seed,
        mean_power: total.power / total.n,
    })
}
