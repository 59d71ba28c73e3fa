//! Ornstein-Uhlenbeck simulation on the unit time grid.
//!
//! The process `dx = θ(μ − x)dt + σ dW` is advanced with its exact AR(1)
//! transition, so there is no discretization bias at Δt = 1.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{exp, sqrt};
use crate::{Error, Result};

/// Parameters of the monitored process.
///
/// `sigma = 0` is accepted as the noiseless limit; every other constructor in
/// the crate (notably [`ParamRanges`]) requires strictly positive volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    theta: f64,
    sigma: f64,
    mu: f64,
}

impl OuParams {
    pub fn new(theta: f64, sigma: f64, mu: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Config("theta must be finite and > 0"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config("sigma must be finite and >= 0"));
        }
        if !mu.is_finite() {
            return Err(Error::Config("mu must be finite"));
        }
        Ok(Self { theta, sigma, mu })
    }

    /// Zero-mean process, the only kind the experiments use.
    pub fn centered(theta: f64, sigma: f64) -> Result<Self> {
        Self::new(theta, sigma, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Stationary variance `σ² / 2θ`.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.theta)
    }

    /// One exact unit step from `x` driven by the standard normal draw `z`.
    #[inline]
    pub fn step(&self, x: f64, z: f64) -> f64 {
        let decay = exp(-self.theta);
        let scale = self.sigma * sqrt((1.0 - exp(-2.0 * self.theta)) / (2.0 * self.theta));
        x * decay + self.mu * (1.0 - decay) + scale * z
    }
}

/// Uniform sampling box for per-episode parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub theta_min: f64,
    pub theta_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl ParamRanges {
    pub fn new(theta_min: f64, theta_max: f64, sigma_min: f64, sigma_max: f64) -> Result<Self> {
        let r = Self {
            theta_min,
            theta_max,
            sigma_min,
            sigma_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi;
        if !ok(self.theta_min, self.theta_max) {
            return Err(Error::Config("theta range must satisfy 0 < min <= max"));
        }
        if !ok(self.sigma_min, self.sigma_max) {
            return Err(Error::Config("sigma range must satisfy 0 < min <= max"));
        }
        Ok(())
    }
}

impl Default for ParamRanges {
    /// θ ∈ [0.02, 0.03], σ ∈ [0.4, 0.6].
    fn default() -> Self {
        Self {
            theta_min: 0.02,
            theta_max: 0.03,
            sigma_min: 0.4,
            sigma_max: 0.6,
        }
    }
}

/// A realization on the integer grid `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Config("time series needs at least two points"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("time series values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        self.values.get(t).copied()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl core::ops::Index<usize> for TimeSeries {
    type Output = f64;

    fn index(&self, t: usize) -> &f64 {
        &self.values[t]
    }
}

/// Draws a series whose first value comes from the stationary law
/// `Normal(μ, σ²/2θ)`.
pub fn generate_ou<R: Rng + ?Sized>(
    params: &OuParams,
    length: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    let z: f64 = rng.sample(StandardNormal);
    let x0 = params.mu + sqrt(params.stationary_variance()) * z;
    generate_ou_from(params, x0, length, rng)
}

/// Like [`generate_ou`] but starting from a fixed `x0`.
pub fn generate_ou_from<R: Rng + ?Sized>(
    params: &OuParams,
    x0: f64,
    length: usize,
    rng: &mut R,
) -> Result<TimeSeries> {
    if length < 2 {
        return Err(Error::Config("series length must be at least 2"));
    }
    if !x0.is_finite() {
        return Err(Error::Config("initial value must be finite"));
    }
    let mut values = Vec::with_capacity(length);
    let mut x = x0;
    values.push(x);
    for _ in 1..length {
        let z: f64 = rng.sample(StandardNormal);
        x = params.step(x, z);
        values.push(x);
    }
    TimeSeries::new(values)
}

/// θ and σ uniform over `ranges`, μ = 0.
pub fn sample_params<R: Rng + ?Sized>(ranges: &ParamRanges, rng: &mut R) -> Result<OuParams> {
    ranges.validate()?;
    let theta = rng.random_range(ranges.theta_min..=ranges.theta_max);
    let sigma = rng.random_range(ranges.sigma_min..=ranges.sigma_max);
    OuParams::centered(theta, sigma)
}

/// Samples parameters and a series of `length` from one stream, the way every
/// training and test episode does.
pub fn sample_episode<R: Rng + ?Sized>(
    ranges: &ParamRanges,
    length: usize,
    rng: &mut R,
) -> Result<(OuParams, TimeSeries)> {
    let params = sample_params(ranges, rng)?;
    let series = generate_ou(&params, length, rng)?;
    Ok((params, series))
}
