use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{relu, Dense, Params, PROB_CEIL, PROB_FLOOR};
use crate::math::sigmoid;
use crate::{Error, Result};

/// Discriminator on a single value: three dense layers, ReLU in between,
/// sigmoid on the output.
///
/// The output probability is clamped to `[PROB_FLOOR, PROB_CEIL]`; the
/// clamp has zero derivative where it is active.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorNet {
    fc1: Dense,
    fc2: Dense,
    fc3: Dense,
    version: u64,
}

#[derive(Debug, Clone)]
pub struct DiscriminatorTape {
    version: u64,
    input: f64,
    a1: Vec<f64>,
    r1: Vec<f64>,
    a2: Vec<f64>,
    r2: Vec<f64>,
    prob: f64,
    clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorGrads {
    pub params: Vec<f64>,
    pub input: f64,
}

impl DiscriminatorNet {
    pub const HIDDEN: usize = 64;

    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::with_hidden(Self::HIDDEN, rng)
    }

    pub fn with_hidden<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Self {
        assert!(hidden >= 1);
        Self {
            fc1: Dense::random(1, hidden, rng),
            fc2: Dense::random(hidden, hidden, rng),
            fc3: Dense::random(hidden, 1, rng),
            version: 0,
        }
    }

    pub fn from_layers(fc1: Dense, fc2: Dense, fc3: Dense) -> Result<Self> {
        let checks = [
            ("fc1 input", 1, fc1.n_in),
            ("fc1 weights", fc1.n_in * fc1.n_out, fc1.weights.len()),
            ("fc1 bias", fc1.n_out, fc1.bias.len()),
            ("fc2 input", fc1.n_out, fc2.n_in),
            ("fc2 weights", fc2.n_in * fc2.n_out, fc2.weights.len()),
            ("fc2 bias", fc2.n_out, fc2.bias.len()),
            ("fc3 input", fc2.n_out, fc3.n_in),
            ("fc3 output", 1, fc3.n_out),
            ("fc3 weights", fc3.n_in, fc3.weights.len()),
            ("fc3 bias", 1, fc3.bias.len()),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(Error::Shape {
                    what,
                    expected,
                    found,
                });
            }
        }
        Ok(Self {
            fc1,
            fc2,
            fc3,
            version: 0,
        })
    }

    pub fn fc1(&self) -> &Dense {
        &self.fc1
    }

    pub fn fc2(&self) -> &Dense {
        &self.fc2
    }

    pub fn fc3(&self) -> &Dense {
        &self.fc3
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn forward(&self, v: f64) -> (f64, DiscriminatorTape) {
        let mut a1 = vec![0.0; self.fc1.n_out];
        self.fc1.forward(&[v], &mut a1);
        let r1: Vec<f64> = a1.iter().map(|&a| relu(a)).collect();
        let mut a2 = vec![0.0; self.fc2.n_out];
        self.fc2.forward(&r1, &mut a2);
        let r2: Vec<f64> = a2.iter().map(|&a| relu(a)).collect();
        let mut z = [0.0];
        self.fc3.forward(&r2, &mut z);
        let raw = sigmoid(z[0]);
        let prob = raw.clamp(PROB_FLOOR, PROB_CEIL);
        let tape = DiscriminatorTape {
            version: self.version,
            input: v,
            a1,
            r1,
            a2,
            r2,
            prob,
            clamped: prob != raw,
        };
        (prob, tape)
    }

    pub fn probability(&self, v: f64) -> f64 {
        self.forward(v).0
    }

    /// Gradients of the output probability scaled by `upstream` (= dL/dp).
    pub fn backward(&self, tape: DiscriminatorTape, upstream: f64) -> Result<DiscriminatorGrads> {
        if tape.version != self.version || tape.a1.len() != self.fc1.n_out {
            return Err(Error::Usage(
                "discriminator tape is stale: weights changed since forward",
            ));
        }
        let mut params = vec![0.0; self.num_params()];
        let dz = if tape.clamped {
            0.0
        } else {
            upstream * tape.prob * (1.0 - tape.prob)
        };
        let (g1, rest) = params.split_at_mut(self.fc1.num_params());
        let (g2, g3) = rest.split_at_mut(self.fc2.num_params());

        let mut dr2 = vec![0.0; self.fc3.n_in];
        self.fc3.backward(&tape.r2, &[dz], g3, Some(&mut dr2));
        let da2: Vec<f64> = dr2
            .iter()
            .zip(&tape.a2)
            .map(|(&d, &a)| if a > 0.0 { d } else { 0.0 })
            .collect();
        let mut dr1 = vec![0.0; self.fc2.n_in];
        self.fc2.backward(&tape.r1, &da2, g2, Some(&mut dr1));
        let da1: Vec<f64> = dr1
            .iter()
            .zip(&tape.a1)
            .map(|(&d, &a)| if a > 0.0 { d } else { 0.0 })
            .collect();
        let mut dv = [0.0];
        self.fc1.backward(&[tape.input], &da1, g1, Some(&mut dv));
        Ok(DiscriminatorGrads {
            params,
            input: dv[0],
        })
    }
}

impl Params for DiscriminatorNet {
    fn num_params(&self) -> usize {
        self.fc1.num_params() + self.fc2.num_params() + self.fc3.num_params()
    }

    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.fc1.weights);
        f(&self.fc1.bias);
        f(&self.fc2.weights);
        f(&self.fc2.bias);
        f(&self.fc3.weights);
        f(&self.fc3.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.version += 1;
        f(&mut self.fc1.weights);
        f(&mut self.fc1.bias);
        f(&mut self.fc2.weights);
        f(&mut self.fc2.bias);
        f(&mut self.fc3.weights);
        f(&mut self.fc3.bias);
    }
}
