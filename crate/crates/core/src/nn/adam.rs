use alloc::vec;
use alloc::vec::Vec;

use super::Params;
use crate::math::sqrt;
use crate::{Error, Result};

const MOMENT_FLUSH: f64 = 1e-150;

/// Adam optimizer state for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub const DEFAULT_LR: f64 = 1e-3;

    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Applies one bias-corrected Adam update to `params` from `grads`
    /// (flat, in [`Params`] order).
    pub fn step<P: Params + ?Sized>(&mut self, params: &mut P, grads: &[f64]) -> Result<()> {
        let n = params.num_params();
        if grads.len() != n || self.m.len() != n {
            return Err(Error::Shape {
                what: "adam gradient",
                expected: self.m.len(),
                found: grads.len().max(n),
            });
        }
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let bc1 = 1.0 - libm::pow(b1, self.step as f64);
        let bc2 = 1.0 - libm::pow(b2, self.step as f64);
        // Bias correction folded into the step size and epsilon:
        // m̂ / (sqrt(v̂) + ε) = (m · sqrt(bc2) / bc1) / (sqrt(v) + ε · sqrt(bc2)).
        let lr_t = self.lr * sqrt(bc2) / bc1;
        let eps_t = self.eps * sqrt(bc2);
        let (m, v) = (&mut self.m, &mut self.v);
        let mut off = 0;
        params.visit_mut(&mut |slice| {
            let n = slice.len();
            let moments = m[off..off + n].iter_mut().zip(&mut v[off..off + n]);
            for ((p, &g), (mi, vi)) in slice.iter_mut().zip(&grads[off..off + n]).zip(moments) {
                let mut mn = b1 * *mi + (1.0 - b1) * g;
                let mut vn = b2 * *vi + (1.0 - b2) * g * g;
                // Moments of dead units decay geometrically into subnormals,
                // which are orders of magnitude slower to compute with.
                if mn.abs() < MOMENT_FLUSH {
                    mn = 0.0;
                }
                if vn < MOMENT_FLUSH {
                    vn = 0.0;
                }
                *mi = mn;
                *vi = vn;
                *p -= lr_t * mn / (sqrt(vn) + eps_t);
            }
            off += n;
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Scalar(f64);

    impl Params for Scalar {
        fn num_params(&self) -> usize {
            1
        }
        fn visit(&self, f: &mut dyn FnMut(&[f64])) {
            f(core::slice::from_ref(&self.0))
        }
        fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
            f(core::slice::from_mut(&mut self.0))
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Scalar(0.5);
        let mut opt = Adam::new(1, 1e-3);
        opt.step(&mut p, &[1.0]).unwrap();
        // m̂ = v̂ = 1 after bias correction, so the step is lr / (1 + eps).
        assert!((p.0 - (0.5 - 1e-3 / (1.0 + 1e-8))).abs() < 1e-15);
        assert_eq!(opt.steps(), 1);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = Scalar(0.25);
        let mut opt = Adam::new(1, 1e-3);
        for _ in 0..10 {
            opt.step(&mut p, &[0.0]).unwrap();
        }
        assert_eq!(p.0, 0.25);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = Scalar(0.0);
        let mut opt = Adam::new(1, 1e-3);
        assert!(matches!(
            opt.step(&mut p, &[1.0, 2.0]),
            Err(Error::Shape { .. })
        ));
        let mut opt = Adam::new(3, 1e-3);
        assert!(opt.step(&mut p, &[1.0]).is_err());
    }
}
