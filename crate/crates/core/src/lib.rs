//! Semi-asynchronous hierarchical federated learning (device -> edge -> cloud)
//! over a modeled OFDMA wireless network.
//!
//! The crate is `no_std` (with `alloc`) and carries every algorithmic piece:
//! logistic-regression training and gradient-norm importance ([`model`]),
//! edge/cloud aggregation and the elastic edge update ([`aggregation`]),
//! rate and latency accounting ([`radio`]), the joint edge-selection and
//! bandwidth-allocation solver with its exhaustive oracle ([`scheduler`]),
//! and the round-by-round simulator ([`sim`]). File formats, configuration
//! and the CLI live in the `shfl` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aggregation;
pub mod data;
pub mod error;
mod math;
pub mod model;
pub mod radio;
pub mod rng;
pub mod scheduler;
pub mod sim;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
