//! Link-level analysis of transmitter and receiver I/Q imbalance in
//! multi-user MIMO-OFDM terahertz links with array-of-subarrays hybrid
//! beamforming.
//!
//! The crate is organised bottom-up:
//!
//! - [`config`]: system dimensions and the symmetric OFDM subcarrier grid.
//! - [`channel`]: LOS planar-array channels and the Rayleigh baseline.
//! - [`impairments`]: imbalance mixing matrices, image rejection, noise.
//! - [`beamforming`]: analog/digital beamformers and effective channels.
//! - [`metrics`]: SINR, rates, minimum bit energy, wideband slope.
//! - [`experiments`]: seeded Monte Carlo studies and CSV output.
//!
//! The `book/` directory at the repository root walks through the model
//! chapter by chapter; its code listings are compiled and run as doctests of
//! this crate.

// `!(x > 0.0)` is how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod impairments;
pub mod metrics;
pub mod numeric;

pub use config::{PerSubcarrier, Subcarrier, SystemConfig};
pub use error::{Error, Result};
pub use numeric::CMatrix;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/iq-imbalance.md")]
    mod iq_imbalance {}
    #[doc = include_str!("../../../book/src/beamforming.md")]
    mod beamforming {}
    #[doc = include_str!("../../../book/src/wideband.md")]
    mod wideband {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
