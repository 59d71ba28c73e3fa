//! One level of the hierarchy: a generator predicting `x(t+i)` from
//! `[x(t), x̂(t+1), …, x̂(t+i−1)]` and a value-only discriminator.

use rand::Rng;

use crate::math::ln;
use crate::nn::{Adam, DiscriminatorNet, GeneratorNet, Params, PROB_CEIL, PROB_FLOOR};
use crate::{Error, Result};

/// `−(ln D(x) + ln(1 − D(x̂)))`.
pub fn discriminator_loss(p_real: f64, p_fake: f64) -> f64 {
    let p_real = p_real.clamp(PROB_FLOOR, PROB_CEIL);
    let p_fake = p_fake.clamp(PROB_FLOOR, PROB_CEIL);
    -(ln(p_real) + ln(1.0 - p_fake))
}

/// `ln(1 − D(x̂)) + (x̂ − x)²`.
pub fn generator_loss(p_fake: f64, pred: f64, target: f64) -> f64 {
    let p_fake = p_fake.clamp(PROB_FLOOR, PROB_CEIL);
    let err = pred - target;
    ln(1.0 - p_fake) + err * err
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    /// Discriminator loss before its update.
    pub disc_loss: f64,
    /// Generator loss against the updated discriminator.
    pub gen_loss: f64,
    /// `(x̂ − x)²` of the prediction that was trained on.
    pub sq_err: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanLevel {
    index: usize,
    generator: GeneratorNet,
    discriminator: DiscriminatorNet,
    gen_opt: Adam,
    disc_opt: Adam,
    frozen: bool,
}

impl GanLevel {
    /// Fresh level `index` (1-based) with default network sizes and Adam
    /// at the default learning rate.
    pub fn new<R: Rng + ?Sized>(index: usize, rng: &mut R) -> Result<Self> {
        if index == 0 {
            return Err(Error::Config("level index starts at 1"));
        }
        let generator = GeneratorNet::new(index, rng);
        let discriminator = DiscriminatorNet::new(rng);
        Self::from_nets(index, generator, discriminator, Adam::DEFAULT_LR)
    }

    pub fn from_nets(
        index: usize,
        generator: GeneratorNet,
        discriminator: DiscriminatorNet,
        lr: f64,
    ) -> Result<Self> {
        if generator.input_size() != index {
            return Err(Error::Shape {
                what: "generator input size vs level index",
                expected: index,
                found: generator.input_size(),
            });
        }
        Ok(Self {
            index,
            gen_opt: Adam::new(generator.num_params(), lr),
            disc_opt: Adam::new(discriminator.num_params(), lr),
            generator,
            discriminator,
            frozen: false,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn generator(&self) -> &GeneratorNet {
        &self.generator
    }

    pub fn discriminator(&self) -> &DiscriminatorNet {
        &self.discriminator
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn thaw(&mut self) {
        self.frozen = false;
    }

    /// Sets the learning rate of both optimizers.
    pub fn set_learning_rate(&mut self, lr: f64) {
        self.gen_opt.lr = lr;
        self.disc_opt.lr = lr;
    }

    /// `x̂(t+i)` from the conditioning vector `s` (length `i`).
    pub fn predict(&self, s: &[f64]) -> Result<f64> {
        self.generator.predict(s)
    }

    /// One discriminator update on `(x_real, x̂)` with `x̂` treated as a
    /// constant, then one generator update on the generator loss against the
    /// updated discriminator. Neither update touches the other network.
    pub fn train_step(&mut self, s: &[f64], x_real: f64) -> Result<LossReport> {
        if self.frozen {
            return Err(Error::Usage("level is frozen"));
        }
        let (pred, gen_tape) = self.generator.forward(s)?;

        let (p_real, real_tape) = self.discriminator.forward(x_real);
        let (p_fake, fake_tape) = self.discriminator.forward(pred);
        let disc_loss = discriminator_loss(p_real, p_fake);
        let mut grads = self
            .discriminator
            .backward(real_tape, -1.0 / p_real)?
            .params;
        let fake = self
            .discriminator
            .backward(fake_tape, 1.0 / (1.0 - p_fake))?;
        for (g, f) in grads.iter_mut().zip(&fake.params) {
            *g += f;
        }
        self.disc_opt.step(&mut self.discriminator, &grads)?;

        let (p_fake, fake_tape) = self.discriminator.forward(pred);
        let gen_loss = generator_loss(p_fake, pred, x_real);
        let d_pred = self
            .discriminator
            .backward(fake_tape, -1.0 / (1.0 - p_fake))?
            .input
            + 2.0 * (pred - x_real);
        let gen_grads = self.generator.backward(gen_tape, d_pred)?;
        self.gen_opt.step(&mut self.generator, &gen_grads.params)?;

        let err = pred - x_real;
        Ok(LossReport {
            disc_loss,
            gen_loss,
            sq_err: err * err,
            prediction: pred,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn loss_reference_values() {
        assert!((discriminator_loss(0.5, 0.5) - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
        assert!(discriminator_loss(1.0, 0.0) < 1e-6);
        // −(ln 0.9 + ln 0.8)
        assert!((discriminator_loss(0.9, 0.2) - 0.328_504_066_972_036_2).abs() < 1e-12);
        assert!((generator_loss(0.5, 1.0, 1.0) + core::f64::consts::LN_2).abs() < 1e-12);
        assert!((generator_loss(0.5, 3.0, 1.0) - (4.0 - core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn losses_stay_finite_at_extremes() {
        for &p in &[0.0, 1e-300, 0.5, 1.0 - 1e-17, 1.0] {
            for &q in &[0.0, 1e-300, 0.5, 1.0] {
                assert!(discriminator_loss(p, q).is_finite());
                assert!(generator_loss(q, 1.0, -1.0).is_finite());
            }
        }
    }

    #[test]
    fn frozen_level_rejects_training() {
        let mut rng = stream(1, Domain::Scratch, 0);
        let mut level = GanLevel::new(2, &mut rng).unwrap();
        level.freeze();
        let before = level.clone();
        assert_eq!(
            level.train_step(&[0.1, 0.2], 0.3),
            Err(Error::Usage("level is frozen"))
        );
        assert_eq!(level, before);
    }

    #[test]
    fn predict_checks_length() {
        let mut rng = stream(1, Domain::Scratch, 0);
        let level = GanLevel::new(3, &mut rng).unwrap();
        assert!(level.predict(&[1.0, 2.0, 3.0]).is_ok());
        assert!(matches!(
            level.predict(&[1.0, 2.0]),
            Err(Error::Shape { .. })
        ));
        assert!(GanLevel::new(0, &mut rng).is_err());
    }

    #[test]
    fn train_step_is_deterministic() {
        let mut a = GanLevel::new(2, &mut stream(9, Domain::Scratch, 0)).unwrap();
        let mut b = a.clone();
        let ra = a.train_step(&[0.4, 0.3], 0.2).unwrap();
        let rb = b.train_step(&[0.4, 0.3], 0.2).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
    }
}
