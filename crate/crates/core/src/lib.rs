//! Age of Incorrect Information (AoII) for uplink NOMA semantic
//! communication.
//!
//! The crate computes the AoII of a multi-user uplink where each user's
//! semantic similarity follows a logistic function of its post-SIC SINR and
//! status updates traverse a D/M/1 scheduler feeding two parallel
//! exponential servers.
//!
//! - [`numerics`]: Lambert W, fixed points, golden-section search.
//! - [`semantic`]: SINR, similarity, semantic rate and their constraints.
//! - [`queueing`]: closed-form delays, AoI and AoII.
//! - [`sim`]: discrete-event validation of the queueing results.
//! - [`optimizer`]: exact linear search for service rates and the power policy.
//! - [`config`] and [`harness`]: TOML scenarios, reports and parameter sweeps
//!   behind the `noma-aoii` binary.

pub mod config;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod optimizer;
pub mod queueing;
pub mod semantic;
pub mod sim;

pub use error::{Error, Result};
