//! Ground-truth crossings and the four detection metrics.

use alloc::vec::Vec;

use crate::{Error, Result};

/// First grid point on the far side of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CrossingEvent {
    pub t_true: usize,
}

/// Every `t ≥ 1` at which the series is on a different side of `gamma` than
/// at `t − 1`. A value exactly on `gamma` keeps the side of the point before
/// it; leading values on `gamma` take no side at all.
pub fn find_crossings(series: &[f64], gamma: f64) -> Vec<CrossingEvent> {
    let mut out = Vec::new();
    let mut side: Option<bool> = None;
    for (t, &x) in series.iter().enumerate() {
        let above = if x > gamma {
            true
        } else if x < gamma {
            false
        } else {
            continue;
        };
        if let Some(prev) = side {
            if prev != above {
                out.push(CrossingEvent { t_true: t });
            }
        }
        side = Some(above);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeMetrics {
    /// One entry per detected crossing.
    pub delays: Vec<usize>,
    pub n_crossings: usize,
    pub n_missed: usize,
    pub error_cost: f64,
    pub samples: usize,
    pub length: usize,
    pub sampling_ratio: f64,
}

/// Scores sample instants `times` against the true crossings of `series`.
///
/// Crossing `k` is detected by the earliest sample `T` with
/// `t_k ≤ T < t_{k+1}` (`t_{K+1} = L`); its delay is `T − t_k` and its cost
/// `Σ_{t_k ≤ t < T} |x(t) − Γ|`. A missed crossing accrues cost over its
/// whole window `[t_k, t_{k+1})`. Sample times at or past the end of the
/// series are ignored; `times` must be strictly increasing.
pub fn score_trace(series: &[f64], times: &[usize], gamma: f64) -> Result<EpisodeMetrics> {
    if series.len() < 2 {
        return Err(Error::Usage("series must have at least two points"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("sample times must be strictly increasing"));
    }
    let len = series.len();
    let in_range = &times[..times.partition_point(|&t| t < len)];
    let crossings = find_crossings(series, gamma);
    let mut m = EpisodeMetrics {
        n_crossings: crossings.len(),
        samples: in_range.len(),
        length: len,
        sampling_ratio: in_range.len() as f64 / len as f64,
        ..EpisodeMetrics::default()
    };
    for (k, c) in crossings.iter().enumerate() {
        let window_end = crossings.get(k + 1).map_or(len, |n| n.t_true);
        let first = in_range.partition_point(|&t| t < c.t_true);
        let stop = match in_range.get(first) {
            Some(&t) if t < window_end => {
                m.delays.push(t - c.t_true);
                t
            }
            _ => {
                m.n_missed += 1;
                window_end
            }
        };
        m.error_cost += series[c.t_true..stop]
            .iter()
            .map(|x| (x - gamma).abs())
            .sum::<f64>();
    }
    Ok(m)
}

/// Pooled statistics over many episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub episodes: usize,
    pub n_crossings: usize,
    pub n_detected: usize,
    pub n_missed: usize,
    /// Mean delay over all detected crossings; `None` if nothing was detected.
    pub mean_delay: Option<f64>,
    /// Missed / total crossings; `None` if there were no crossings.
    pub miss_rate: Option<f64>,
    /// Mean per-episode cost of error.
    pub mean_cost: f64,
    pub mean_sampling_ratio: f64,
}

pub fn aggregate(metrics: &[EpisodeMetrics]) -> Result<Summary> {
    if metrics.is_empty() {
        return Err(Error::Usage("nothing to aggregate"));
    }
    let n = metrics.len() as f64;
    let n_crossings: usize = metrics.iter().map(|m| m.n_crossings).sum();
    let n_missed: usize = metrics.iter().map(|m| m.n_missed).sum();
    let n_detected: usize = metrics.iter().map(|m| m.delays.len()).sum();
    let delay_sum: usize = metrics.iter().flat_map(|m| m.delays.iter()).sum();
    Ok(Summary {
        episodes: metrics.len(),
        n_crossings,
        n_detected,
        n_missed,
        mean_delay: (n_detected > 0).then(|| delay_sum as f64 / n_detected as f64),
        miss_rate: (n_crossings > 0).then(|| n_missed as f64 / n_crossings as f64),
        mean_cost: metrics.iter().map(|m| m.error_cost).sum::<f64>() / n,
        mean_sampling_ratio: metrics.iter().map(|m| m.sampling_ratio).sum::<f64>() / n,
    })
}
