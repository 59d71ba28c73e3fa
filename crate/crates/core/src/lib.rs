//! Threshold-crossing detection for stochastic time series.
//!
//! This crate is `#![no_std]` (it needs `alloc`) and holds every algorithmic
//! piece of the detector:
//!
//! * [`process`]: exact-discretization Ornstein-Uhlenbeck simulation.
//! * [`nn`]: a tiny dense/LSTM engine with analytic gradients and Adam.
//! * [`gan`]: one generator/discriminator pair and its update step.
//! * [`hierarchy`]: the stacked predictor, its sampling rule, level-by-level
//!   training and test-time episodes.
//! * [`baseline`]: the closed-form sampling policy that knows the process
//!   parameters.
//! * [`metrics`]: ground-truth crossings, delay, miss rate, cost of error and
//!   sampling ratio.
//!
//! File formats, configuration and the CLI live in the `hgan` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
mod error;
pub mod gan;
pub mod hierarchy;
mod math;
pub mod metrics;
pub mod nn;
pub mod process;
pub mod rng;

pub use error::{Error, Result};
