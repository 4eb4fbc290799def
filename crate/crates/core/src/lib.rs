//! SIR meta distribution of K-tier heterogeneous cellular networks.
//!
//! Base stations of each tier form independent homogeneous Poisson point
//! processes with their own density, transmit power and range-expansion bias.
//! A typical user associates with the base station maximizing biased received
//! power, and all links see Rayleigh fading. This crate computes, in closed
//! form and by numerical inversion:
//!
//! * access probabilities and moments `M_b` of the conditional success
//!   probability, overall and per tier ([`analytics`]),
//! * the meta distribution (CCDF of the link reliability) by Gil-Pelaez
//!   inversion of imaginary moments, its beta approximation and percentile
//!   users ([`meta`]),
//! * asymptotic SIR gains relative to the single-tier PPP ([`gains`]),
//! * ALOHA base-station activity, mean local delay and the finite-delay
//!   region of activity probabilities ([`aloha`]),
//!
//! and validates them against an independent Monte Carlo simulator of the
//! point process ([`sim`]).
//!
//! ```
//! use hetnet_meta::{analytics, NetworkConfig, Scope, TierParams};
//!
//! let net = NetworkConfig::new(
//!     4.0,
//!     vec![TierParams::new(1.0, 1.0, 1.0), TierParams::new(5.0, 0.2, 10.0)],
//! )
//! .unwrap();
//! let m1 = analytics::moment(&net, Scope::Tier(0), 1.0, 1.0.into()).unwrap();
//! assert!(m1.value.re > 0.0 && m1.value.re < 1.0);
//! ```

pub mod aloha;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod gains;
pub mod meta;
pub mod network;
pub mod sim;
pub mod specfun;

pub use analytics::{MeanLocalDelay, MomentQuery, MomentValue, Scope};
pub use error::{Error, Result};
pub use network::{NetworkConfig, PairRatios, TierParams};
pub use num_complex::Complex64;
pub use specfun::PathLoss;

/// Converts a linear power ratio to decibels.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts decibels to a linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
