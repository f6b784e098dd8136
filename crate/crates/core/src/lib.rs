//! Secrecy capacity of ergodic Rayleigh block-fading wiretap channels.
//!
//! The transmitter sends to a legitimate receiver over a fading main channel
//! while an eavesdropper listens through its own, independent fading channel.
//! Depending on what the transmitter knows about the instantaneous power gains
//! (h_M, h_E), this crate computes
//!
//! * the full-CSI secrecy capacity and its optimal power policy,
//! * the main-channel-CSI secrecy capacity and its optimal policy,
//! * the on/off scheme (constant power above a gain threshold),
//! * a KKT point of the non-concave constant-rate scheme,
//! * the receiver-CSI-only baseline and the high-SNR limit,
//!
//! and provides independent oracles (Monte Carlo, quantized achievability) to
//! check them. All rates are in nats per channel use.
//!
//! ```
//! use wiretap_core::prelude::*;
//!
//! let model = RayleighFadingPair::new(1.0, 2.0).unwrap();
//! let budget = PowerConstraint::new(10.0).unwrap();
//! // A stronger eavesdropper on average defeats the no-CSI baseline...
//! assert_eq!(receiver_only_rate(&model, &budget).unwrap(), 0.0);
//! // ...but not rate adaptation with a threshold on the main gain.
//! let onoff = onoff_rate_closed_form(&model, &budget, 0.5).unwrap();
//! assert!(onoff > 0.1);
//! ```

pub mod config;
pub mod error;
pub mod fading;
mod integrals;
pub mod numerics;
pub mod policies;
pub mod rates;
pub mod scheme;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::config::{RateUnit, SolverConfig};
    pub use crate::error::{Error, Result};
    pub use crate::fading::{ChannelState, RayleighFadingPair};
    pub use crate::policies::{
        make_onoff, optimize_onoff_threshold, solve_constant_rate, solve_full_csi, solve_main_csi, PowerConstraint,
    };
    pub use crate::rates::{
        constant_rate_objective, full_csi_rate, high_snr_limit, main_csi_rate, onoff_rate_closed_form,
        receiver_only_rate,
    };
    pub use crate::scheme::{evaluate, Scheme, SchemeEvaluation};
}

// Book chapters are compiled as doctests so the guide cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fading.md")]
    mod fading {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
