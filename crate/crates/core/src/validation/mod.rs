//! Oracles that check the analytic results independently: Monte Carlo over
//! fading realizations, and the binned construction whose rate lower-bounds
//! the full-CSI capacity.

mod monte_carlo;
mod quantized;
mod suite;

pub use monte_carlo::{mc_rate, McEstimate, SchemePolicy};
pub use quantized::{
    achievability_report, quantized_achievable_rate, quantized_upper_sum, truncation_mass, AchievabilityReport,
    QuantizationSpec,
};
pub use suite::{run_validation, Check, ValidationReport};
