//! Closed-form sampling policy for a fully known OU process.
//!
//! With sampling cost `c_s`, the interval at the threshold is
//! `T* = (18π c_s² / σ²)^(1/3)` and the next sample is taken
//! `T* + (1 − e^(−θT*)) / sqrt(1 − e^(−2θT*)) · sqrt(π) / (σ sqrt(θ)) · d`
//! later, where `d = |x(t) − Γ|` is the distance to the threshold.

use core::f64::consts::PI;

use crate::hierarchy::SamplingTrace;
use crate::math::{cbrt, exp, round, sqrt};
use crate::process::{OuParams, TimeSeries};
use crate::{Error, Result};

/// Sampling interval used when the process sits on the threshold.
pub fn t_star(c_s: f64, sigma: f64) -> Result<f64> {
    if !(c_s.is_finite() && c_s > 0.0) {
        return Err(Error::Config("sampling cost must be finite and > 0"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Config("sigma must be finite and > 0"));
    }
    Ok(cbrt(18.0 * PI * c_s * c_s / (sigma * sigma)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    c_s: f64,
    params: OuParams,
    gamma: f64,
    t_star: f64,
    slope: f64,
}

impl BaselineConfig {
    pub fn new(c_s: f64, params: OuParams, gamma: f64) -> Result<Self> {
        let ts = t_star(c_s, params.sigma())?;
        if !gamma.is_finite() {
            return Err(Error::Config("threshold must be finite"));
        }
        let theta = params.theta();
        let slope = (1.0 - exp(-theta * ts)) / sqrt(1.0 - exp(-2.0 * theta * ts)) * sqrt(PI)
            / (params.sigma() * sqrt(theta));
        Ok(Self {
            c_s,
            params,
            gamma,
            t_star: ts,
            slope,
        })
    }

    pub fn c_s(&self) -> f64 {
        self.c_s
    }

    pub fn params(&self) -> &OuParams {
        &self.params
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }
}

/// Continuous time until the next sample given the current value.
pub fn next_sample_offset(x_t: f64, cfg: &BaselineConfig) -> f64 {
    cfg.t_star + cfg.slope * (x_t - cfg.gamma).abs()
}

/// Samples `series` from `t = 0`, advancing `max(1, round(offset))` steps
/// at a time until the next instant falls past the end.
pub fn run_baseline_episode(series: &TimeSeries, cfg: &BaselineConfig) -> SamplingTrace {
    let mut trace = SamplingTrace::default();
    let mut t = 0;
    loop {
        let x = series[t];
        trace.push(t, x);
        let gap = round(next_sample_offset(x, cfg)).max(1.0);
        // Offsets beyond the series end just terminate the episode.
        if gap >= (series.len() - t) as f64 {
            return trace;
        }
        t += gap as usize;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn cfg() -> BaselineConfig {
        BaselineConfig::new(0.1, OuParams::centered(0.025, 0.5).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn t_star_reference_and_homogeneity() {
        let ts = t_star(0.1, 0.5).unwrap();
        assert!((ts - libm::cbrt(0.72 * PI)).abs() < 1e-12);
        // Frozen from an independent 50-digit evaluation.
        assert!((ts - 1.312_685_807_337_465_5).abs() < 1e-12);
        for k in [0.01, 0.3, 2.0, 17.0] {
            let scaled = t_star(0.1 * k, 0.5 * k).unwrap();
            assert!((scaled - ts).abs() < 1e-12 * ts);
        }
        assert!(t_star(0.0, 0.5).is_err());
        assert!(t_star(0.1, -1.0).is_err());
    }

    #[test]
    fn offset_reference_value() {
        // 50-digit evaluation of the closed form at θ=0.025, σ=0.5, c_s=0.1, x=1.
        let got = next_sample_offset(1.0, &cfg());
        assert!((got - 4.184_463_660_338_339).abs() < 1e-9, "{got}");
        assert_eq!(next_sample_offset(0.0, &cfg()), cfg().t_star());
    }

    #[test]
    fn constant_series_on_threshold_samples_at_fixed_period() {
        let series = TimeSeries::new(vec![0.0; 20]).unwrap();
        let trace = run_baseline_episode(&series, &cfg());
        let period = libm::round(cfg().t_star()).max(1.0) as usize;
        let want: Vec<usize> = (0..20).step_by(period).collect();
        assert_eq!(trace.times, want);
    }

    #[test]
    fn trace_times_strictly_increase() {
        let series =
            TimeSeries::new((0..300).map(|t| 3.0 * libm::sin(t as f64 / 17.0)).collect()).unwrap();
        let trace = run_baseline_episode(&series, &cfg());
        assert_eq!(trace.times[0], 0);
        assert!(trace.times.windows(2).all(|w| w[1] > w[0]));
        assert!(*trace.times.last().unwrap() < 300);
    }
}
