use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::fill_uniform;
use crate::math::{axpy, dot, sigmoid, sqrt, tanh};

/// Single LSTM layer.
///
/// Gate rows in `weights`/`bias` are stacked as input, forget, candidate,
/// output; each row spans `[x; h]`. Hidden and cell state start at zero on
/// every call to [`Lstm::forward`], so the layer itself is stateless.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub n_in: usize,
    pub hidden: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Everything backpropagation through time needs from one forward pass.
#[derive(Debug, Clone)]
pub struct LstmTape {
    steps: usize,
    /// `[x_t; h_{t-1}]` per step.
    xh: Vec<f64>,
    /// Activated gates `i, f, g, o` per step.
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl Lstm {
    pub fn zeros(n_in: usize, hidden: usize) -> Self {
        Self {
            n_in,
            hidden,
            weights: vec![0.0; 4 * hidden * (n_in + hidden)],
            bias: vec![0.0; 4 * hidden],
        }
    }

    /// Uniform in `±sqrt(1/(n_in + hidden))` with the forget-gate bias set to 1.
    pub fn random<R: Rng + ?Sized>(n_in: usize, hidden: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(n_in, hidden);
        let bound = sqrt(1.0 / (n_in + hidden) as f64);
        fill_uniform(&mut layer.weights, bound, rng);
        fill_uniform(&mut layer.bias, bound, rng);
        layer.bias[hidden..2 * hidden].fill(1.0);
        layer
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn width(&self) -> usize {
        self.n_in + self.hidden
    }

    /// Runs the sequence `inputs` (`steps × n_in`, row-major) and returns the
    /// final hidden state together with the tape.
    pub fn forward(&self, inputs: &[f64]) -> (Vec<f64>, LstmTape) {
        debug_assert_eq!(inputs.len() % self.n_in, 0);
        let steps = inputs.len() / self.n_in;
        let (h_sz, w) = (self.hidden, self.width());
        let mut tape = LstmTape {
            steps,
            xh: Vec::with_capacity(steps * w),
            gates: Vec::with_capacity(steps * 4 * h_sz),
            c_prev: Vec::with_capacity(steps * h_sz),
            tanh_c: Vec::with_capacity(steps * h_sz),
        };
        let mut h = vec![0.0; h_sz];
        let mut c = vec![0.0; h_sz];
        let mut xh = vec![0.0; w];
        let mut z = vec![0.0; 4 * h_sz];
        for t in 0..steps {
            xh[..self.n_in].copy_from_slice(&inputs[t * self.n_in..(t + 1) * self.n_in]);
            xh[self.n_in..].copy_from_slice(&h);
            for (r, zr) in z.iter_mut().enumerate() {
                *zr = dot(&self.weights[r * w..(r + 1) * w], &xh) + self.bias[r];
            }
            tape.xh.extend_from_slice(&xh);
            tape.c_prev.extend_from_slice(&c);
            for k in 0..h_sz {
                let i = sigmoid(z[k]);
                let f = sigmoid(z[h_sz + k]);
                let g = tanh(z[2 * h_sz + k]);
                let o = sigmoid(z[3 * h_sz + k]);
                z[k] = i;
                z[h_sz + k] = f;
                z[2 * h_sz + k] = g;
                z[3 * h_sz + k] = o;
                c[k] = f * c[k] + i * g;
                let tc = tanh(c[k]);
                h[k] = o * tc;
                tape.tanh_c.push(tc);
            }
            tape.gates.extend_from_slice(&z);
        }
        (h, tape)
    }

    /// Backpropagation through time from `dh_last = dL/dh_T`.
    ///
    /// Accumulates parameter gradients into `grad` (weights then bias) and
    /// writes `dL/dx_t` for every step into `dx` (`steps × n_in`).
    pub fn backward(&self, tape: &LstmTape, dh_last: &[f64], grad: &mut [f64], dx: &mut [f64]) {
        let (h_sz, w) = (self.hidden, self.width());
        debug_assert_eq!(grad.len(), self.num_params());
        debug_assert_eq!(dx.len(), tape.steps * self.n_in);
        let (gw, gb) = grad.split_at_mut(self.weights.len());
        let mut dh = dh_last.to_vec();
        let mut dc = vec![0.0; h_sz];
        let mut dz = vec![0.0; 4 * h_sz];
        let mut dxh = vec![0.0; w];
        for t in (0..tape.steps).rev() {
            let gates = &tape.gates[t * 4 * h_sz..(t + 1) * 4 * h_sz];
            let c_prev = &tape.c_prev[t * h_sz..(t + 1) * h_sz];
            let tanh_c = &tape.tanh_c[t * h_sz..(t + 1) * h_sz];
            let xh = &tape.xh[t * w..(t + 1) * w];
            for k in 0..h_sz {
                let (i, f, g, o) = (
                    gates[k],
                    gates[h_sz + k],
                    gates[2 * h_sz + k],
                    gates[3 * h_sz + k],
                );
                let tc = tanh_c[k];
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                let d_i = dc[k] * g;
                let d_g = dc[k] * i;
                let d_f = dc[k] * c_prev[k];
                dz[k] = d_i * i * (1.0 - i);
                dz[h_sz + k] = d_f * f * (1.0 - f);
                dz[2 * h_sz + k] = d_g * (1.0 - g * g);
                dz[3 * h_sz + k] = d_o * o * (1.0 - o);
                // carry to c_{t-1}
                dc[k] *= f;
            }
            dxh.fill(0.0);
            for (r, &d) in dz.iter().enumerate() {
                axpy(d, xh, &mut gw[r * w..(r + 1) * w]);
                gb[r] += d;
                axpy(d, &self.weights[r * w..(r + 1) * w], &mut dxh);
            }
            dx[t * self.n_in..(t + 1) * self.n_in].copy_from_slice(&dxh[..self.n_in]);
            dh.copy_from_slice(&dxh[self.n_in..]);
        }
    }
}

impl LstmTape {
    pub fn steps(&self) -> usize {
        self.steps
    }
}
