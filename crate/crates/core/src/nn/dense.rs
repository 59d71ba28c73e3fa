use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::fill_uniform;
use crate::math::{axpy, dot, sqrt};

/// Fully-connected layer `y = W x + b`, `W` stored row-major (`out × in`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        }
    }

    /// Uniform in `±sqrt(1/n_in)`.
    pub fn random<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(n_in, n_out);
        let bound = sqrt(1.0 / n_in as f64);
        fill_uniform(&mut layer.weights, bound, rng);
        fill_uniform(&mut layer.bias, bound, rng);
        layer
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        debug_assert_eq!(out.len(), self.n_out);
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            *y = dot(row, x) + self.bias[o];
        }
    }

    /// Accumulates `dL/dW, dL/db` into `grad` (weights then bias) and, if
    /// requested, writes `dL/dx` into `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut [f64], dx: Option<&mut [f64]>) {
        debug_assert_eq!(grad.len(), self.num_params());
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        for (o, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            axpy(d, x, &mut gw[o * self.n_in..(o + 1) * self.n_in]);
            gb[o] += d;
        }
        if let Some(dx) = dx {
            dx.fill(0.0);
            for (o, &d) in dy.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                axpy(d, &self.weights[o * self.n_in..(o + 1) * self.n_in], dx);
            }
        }
    }
}
