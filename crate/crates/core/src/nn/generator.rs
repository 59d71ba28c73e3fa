use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{relu, Dense, Lstm, LstmTape, Params};
use crate::{Error, Result};

/// Generator: the conditioning vector is fed to an LSTM one scalar per step,
/// the final hidden state goes through `fc1` (ReLU) and `fc2` (linear, one
/// output).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet {
    input_size: usize,
    lstm: Lstm,
    fc1: Dense,
    fc2: Dense,
    version: u64,
}

#[derive(Debug, Clone)]
pub struct GeneratorTape {
    version: u64,
    lstm: LstmTape,
    h: Vec<f64>,
    a1: Vec<f64>,
    r1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGrads {
    /// Flat, in [`Params`] order.
    pub params: Vec<f64>,
    /// `d output / d s`.
    pub input: Vec<f64>,
}

impl GeneratorNet {
    pub const HIDDEN: usize = 32;
    pub const FC: usize = 32;

    pub fn new<R: Rng + ?Sized>(input_size: usize, rng: &mut R) -> Self {
        Self::with_sizes(input_size, Self::HIDDEN, Self::FC, rng)
    }

    pub fn with_sizes<R: Rng + ?Sized>(
        input_size: usize,
        hidden: usize,
        fc: usize,
        rng: &mut R,
    ) -> Self {
        assert!(input_size >= 1 && hidden >= 1 && fc >= 1);
        Self {
            input_size,
            lstm: Lstm::random(1, hidden, rng),
            fc1: Dense::random(hidden, fc, rng),
            fc2: Dense::random(fc, 1, rng),
            version: 0,
        }
    }

    /// Rebuilds a generator from explicit layers, checking that they chain.
    pub fn from_layers(input_size: usize, lstm: Lstm, fc1: Dense, fc2: Dense) -> Result<Self> {
        if input_size == 0 {
            return Err(Error::Config("generator input size must be >= 1"));
        }
        let checks = [
            ("lstm input width", 1, lstm.n_in),
            (
                "lstm weights",
                4 * lstm.hidden * (lstm.n_in + lstm.hidden),
                lstm.weights.len(),
            ),
            ("lstm bias", 4 * lstm.hidden, lstm.bias.len()),
            ("fc1 input", lstm.hidden, fc1.n_in),
            ("fc1 weights", fc1.n_in * fc1.n_out, fc1.weights.len()),
            ("fc1 bias", fc1.n_out, fc1.bias.len()),
            ("fc2 input", fc1.n_out, fc2.n_in),
            ("fc2 output", 1, fc2.n_out),
            ("fc2 weights", fc2.n_in, fc2.weights.len()),
            ("fc2 bias", 1, fc2.bias.len()),
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
            input_size,
            lstm,
            fc1,
            fc2,
            version: 0,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn lstm(&self) -> &Lstm {
        &self.lstm
    }

    pub fn fc1(&self) -> &Dense {
        &self.fc1
    }

    pub fn fc2(&self) -> &Dense {
        &self.fc2
    }

    /// Incremented by every mutable parameter access; tapes remember it.
    pub fn version(&self) -> u64 {
        self.version
    }

    fn check_input(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.input_size {
            return Err(Error::Shape {
                what: "generator input",
                expected: self.input_size,
                found: s.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, s: &[f64]) -> Result<(f64, GeneratorTape)> {
        self.check_input(s)?;
        let (h, lstm_tape) = self.lstm.forward(s);
        let mut a1 = vec![0.0; self.fc1.n_out];
        self.fc1.forward(&h, &mut a1);
        let r1: Vec<f64> = a1.iter().map(|&a| relu(a)).collect();
        let mut y = [0.0];
        self.fc2.forward(&r1, &mut y);
        let tape = GeneratorTape {
            version: self.version,
            lstm: lstm_tape,
            h,
            a1,
            r1,
        };
        Ok((y[0], tape))
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, s: &[f64]) -> Result<f64> {
        self.forward(s).map(|(y, _)| y)
    }

    /// Gradients of the scalar output scaled by `upstream` (= dL/dy).
    pub fn backward(&self, tape: GeneratorTape, upstream: f64) -> Result<GeneratorGrads> {
        if tape.version != self.version || tape.lstm.steps() != self.input_size {
            return Err(Error::Usage(
                "generator tape is stale: weights changed since forward",
            ));
        }
        let n_lstm = self.lstm.num_params();
        let n_fc1 = self.fc1.num_params();
        let mut params = vec![0.0; self.num_params()];
        let (g_lstm, rest) = params.split_at_mut(n_lstm);
        let (g_fc1, g_fc2) = rest.split_at_mut(n_fc1);

        let mut dr1 = vec![0.0; self.fc1.n_out];
        self.fc2
            .backward(&tape.r1, &[upstream], g_fc2, Some(&mut dr1));
        let da1: Vec<f64> = dr1
            .iter()
            .zip(&tape.a1)
            .map(|(&d, &a)| if a > 0.0 { d } else { 0.0 })
            .collect();
        let mut dh = vec![0.0; self.lstm.hidden];
        self.fc1.backward(&tape.h, &da1, g_fc1, Some(&mut dh));
        let mut input = vec![0.0; self.input_size];
        self.lstm.backward(&tape.lstm, &dh, g_lstm, &mut input);
        Ok(GeneratorGrads { params, input })
    }
}

impl Params for GeneratorNet {
    fn num_params(&self) -> usize {
        self.lstm.num_params() + self.fc1.num_params() + self.fc2.num_params()
    }

    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.lstm.weights);
        f(&self.lstm.bias);
        f(&self.fc1.weights);
        f(&self.fc1.bias);
        f(&self.fc2.weights);
        f(&self.fc2.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.version += 1;
        f(&mut self.lstm.weights);
        f(&mut self.lstm.bias);
        f(&mut self.fc1.weights);
        f(&mut self.fc1.bias);
        f(&mut self.fc2.weights);
        f(&mut self.fc2.bias);
    }
}
