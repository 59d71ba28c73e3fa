//! Experiment harness for the hierarchical-GAN threshold-crossing detector.
//!
//! The algorithms live in [`hgan_core`]; this crate adds what needs `std`:
//! the binary weight-file format ([`persist`]), flat `key = value`
//! experiment configs ([`config`]), and the train / sweep / demo drivers
//! that write CSV ([`harness`]).

pub mod config;
mod error;
pub mod harness;
pub mod persist;

pub use error::{Error, Result};
