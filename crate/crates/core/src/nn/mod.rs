//! A small neural-network engine: dense and LSTM layers with hand-written
//! backpropagation, plus Adam.
//!
//! Parameters of a network are addressed as a sequence of flat slices (see
//! [`Params`]); gradients returned by `backward` are one flat vector in the
//! same order, which is what [`Adam`] consumes.

mod adam;
mod dense;
mod discriminator;
mod generator;
mod lstm;

pub use adam::Adam;
pub use dense::Dense;
pub use discriminator::{DiscriminatorGrads, DiscriminatorNet, DiscriminatorTape};
pub use generator::{GeneratorGrads, GeneratorNet, GeneratorTape};
pub use lstm::{Lstm, LstmTape};

use alloc::vec::Vec;
use rand::Rng;

/// Bounds applied to discriminator probabilities so logarithms stay finite.
pub const PROB_FLOOR: f64 = 1e-7;
pub const PROB_CEIL: f64 = 1.0 - 1e-7;

/// Ordered access to every trainable parameter of a model.
pub trait Params {
    fn num_params(&self) -> usize;

    fn visit(&self, f: &mut dyn FnMut(&[f64]));

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.visit(&mut |s| out.extend_from_slice(s));
        out
    }

    /// Overwrites every parameter from `flat`, which must hold exactly
    /// [`Params::num_params`] values.
    fn load_flat(&mut self, flat: &[f64]) -> crate::Result<()> {
        if flat.len() != self.num_params() {
            return Err(crate::Error::Shape {
                what: "flat parameter vector",
                expected: self.num_params(),
                found: flat.len(),
            });
        }
        let mut off = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&flat[off..off + s.len()]);
            off += s.len();
        });
        Ok(())
    }
}

pub(crate) fn fill_uniform<R: Rng + ?Sized>(xs: &mut [f64], bound: f64, rng: &mut R) {
    for x in xs {
        *x = rng.random_range(-bound..bound);
    }
}

#[inline]
pub(crate) fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}
