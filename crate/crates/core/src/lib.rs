//! Deterministic simulator for physics-based secret transmission with decoys
//! and for physical solutions of the millionaires' comparison.
//!
//! Runs are driven by a [`sim::Scenario`] and produce a public
//! [`sim::Transcript`] whose digest replays bit-exactly for a given seed.

pub mod adversary;
pub mod channel;
pub mod decoy;
pub mod error;
pub mod millionaires;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
