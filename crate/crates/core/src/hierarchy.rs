//! The stacked predictor and the detector built on it.
//!
//! Level `i` predicts `x(t+i)` from the real sample `x(t)` and the
//! predictions of levels `1..i`. The detector samples at the first predicted
//! crossing point, or `N + 1` steps later when none is predicted.

use alloc::vec::Vec;

use crate::gan::{GanLevel, LossReport};
use crate::process::{sample_episode, ParamRanges, TimeSeries};
use crate::rng::{stream, Domain, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub gamma: f64,
    pub rho: f64,
}

impl DetectorConfig {
    pub fn new(gamma: f64, rho: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::Config("threshold must be finite"));
        }
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::Config("buffer half-width must be finite and >= 0"));
        }
        Ok(Self { gamma, rho })
    }
}

/// Predictions `[x̂(t+1), …, x̂(t+N)]` made at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub base: usize,
    pub values: Vec<f64>,
}

/// Sample instants chosen by a policy and the values read there.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplingTrace {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
}

impl SamplingTrace {
    pub fn push(&mut self, t: usize, value: f64) {
        debug_assert!(self.times.last().map_or(true, |&last| t > last));
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[inline]
fn side(v: f64, gamma: f64) -> i8 {
    if v > gamma {
        1
    } else if v < gamma {
        -1
    } else {
        0
    }
}

/// A prediction is a crossing point when it falls inside `[Γ−ρ, Γ+ρ]` or
/// lies on the other side of `Γ` from the current sample.
#[inline]
pub fn is_crossing_point(pred: f64, x_t: f64, cfg: &DetectorConfig) -> bool {
    (pred - cfg.gamma).abs() <= cfg.rho || side(pred, cfg.gamma) != side(x_t, cfg.gamma)
}

/// `t + Δt` for the first predicted crossing point, else `t + N + 1`.
pub fn next_sample_time(preds: &PredictionSet, x_t: f64, cfg: &DetectorConfig) -> usize {
    preds
        .values
        .iter()
        .position(|&p| is_crossing_point(p, x_t, cfg))
        .map_or(preds.base + preds.values.len() + 1, |k| preds.base + k + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    levels: Vec<GanLevel>,
}

impl Hierarchy {
    pub fn new() -> Self {
        Self { levels: Vec::new() }
    }

    /// Levels must carry indices `1..=N` in order.
    pub fn from_levels(levels: Vec<GanLevel>) -> Result<Self> {
        for (k, level) in levels.iter().enumerate() {
            if level.index() != k + 1 {
                return Err(Error::Shape {
                    what: "level index",
                    expected: k + 1,
                    found: level.index(),
                });
            }
        }
        Ok(Self { levels })
    }

    /// Untrained hierarchy of depth `n`; level `i` is initialized from the
    /// same stream [`train_level`] would use.
    pub fn untrained(n: usize, seed: u64) -> Result<Self> {
        let mut h = Self::new();
        for i in 1..=n {
            let mut rng = stream(seed, Domain::TrainLevel, i as u64);
            h.levels.push(GanLevel::new(i, &mut rng)?);
        }
        Ok(h)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[GanLevel] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> Option<&GanLevel> {
        index.checked_sub(1).and_then(|k| self.levels.get(k))
    }

    pub fn level_mut(&mut self, index: usize) -> Option<&mut GanLevel> {
        index
            .checked_sub(1)
            .and_then(move |k| self.levels.get_mut(k))
    }

    pub fn push(&mut self, level: GanLevel) -> Result<()> {
        if level.index() != self.depth() + 1 {
            return Err(Error::Shape {
                what: "level index",
                expected: self.depth() + 1,
                found: level.index(),
            });
        }
        self.levels.push(level);
        Ok(())
    }

    /// The first `n` levels.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.depth() {
            return Err(Error::Config("truncation depth out of range"));
        }
        Ok(Self {
            levels: self.levels[..n].to_vec(),
        })
    }

    pub fn freeze_all(&mut self) {
        self.levels.iter_mut().for_each(GanLevel::freeze);
    }

    /// Predictions from levels `1..=k` for base time `t`.
    pub fn predict_prefix(&self, k: usize, t: usize, x_t: f64) -> Result<PredictionSet> {
        if k == 0 || k > self.depth() {
            return Err(Error::Usage("cascade depth exceeds hierarchy"));
        }
        let mut s = Vec::with_capacity(k + 1);
        s.push(x_t);
        for level in &self.levels[..k] {
            let p = level.predict(&s)?;
            s.push(p);
        }
        s.remove(0);
        Ok(PredictionSet { base: t, values: s })
    }

    /// `x̂(t+i) = G_i([x_t, x̂(t+1), …, x̂(t+i−1)])` for `i = 1..=N`.
    pub fn predict_cascade(&self, t: usize, x_t: f64) -> Result<PredictionSet> {
        self.predict_prefix(self.depth(), t, x_t)
    }

    /// Runs the detector over `series` without touching any weights.
    pub fn run_offline(&self, series: &TimeSeries, cfg: &DetectorConfig) -> Result<SamplingTrace> {
        let mut trace = SamplingTrace::default();
        let mut t = 0;
        let mut x_t = series[0];
        trace.push(t, x_t);
        loop {
            let preds = self.predict_cascade(t, x_t)?;
            let next = next_sample_time(&preds, x_t, cfg);
            if next >= series.len() {
                return Ok(trace);
            }
            t = next;
            x_t = series[t];
            trace.push(t, x_t);
        }
    }

    /// Runs the detector and, after each new sample `x(T)`, updates the level
    /// that predicted `x̂(T)` on that pair. All other levels stay untouched.
    pub fn run_online(
        &mut self,
        series: &TimeSeries,
        cfg: &DetectorConfig,
    ) -> Result<SamplingTrace> {
        let mut trace = SamplingTrace::default();
        let mut t = 0;
        let mut x_t = series[0];
        trace.push(t, x_t);
        let mut s = Vec::with_capacity(self.depth() + 1);
        loop {
            let preds = self.predict_cascade(t, x_t)?;
            let next = next_sample_time(&preds, x_t, cfg);
            if next >= series.len() {
                return Ok(trace);
            }
            let x_next = series[next];
            let gap = next - t;
            if gap <= self.depth() {
                s.clear();
                s.push(x_t);
                s.extend_from_slice(&preds.values[..gap - 1]);
                let level = &mut self.levels[gap - 1];
                let was_frozen = level.is_frozen();
                level.thaw();
                let res = level.train_step(&s, x_next);
                if was_frozen {
                    level.freeze();
                }
                res?;
            }
            t = next;
            x_t = x_next;
            trace.push(t, x_t);
        }
    }
}

impl Default for Hierarchy {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs one test episode; `online` selects [`Hierarchy::run_online`].
pub fn run_test_episode(
    h: &mut Hierarchy,
    series: &TimeSeries,
    cfg: &DetectorConfig,
    online: bool,
) -> Result<SamplingTrace> {
    if h.depth() == 0 {
        return Err(Error::Usage("empty hierarchy"));
    }
    if online {
        h.run_online(series, cfg)
    } else {
        h.run_offline(series, cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Prediction length `N`, i.e. number of levels.
    pub levels: usize,
    /// Training episodes per level.
    pub episodes: usize,
    /// Series length `L`.
    pub length: usize,
    pub ranges: ParamRanges,
    pub gamma: f64,
    pub seed: u64,
    pub lr: f64,
}

impl TrainConfig {
    pub fn new(levels: usize, episodes: usize, seed: u64) -> Self {
        Self {
            levels,
            episodes,
            length: 1000,
            ranges: ParamRanges::default(),
            gamma: 0.0,
            seed,
            lr: crate::nn::Adam::DEFAULT_LR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Config("at least one level is required"));
        }
        if self.episodes == 0 {
            return Err(Error::Config("at least one training episode is required"));
        }
        if self.length < self.levels + 2 {
            return Err(Error::Config(
                "series length must exceed the number of levels + 1",
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config("learning rate must be > 0"));
        }
        if !self.gamma.is_finite() {
            return Err(Error::Config("threshold must be finite"));
        }
        self.ranges.validate()
    }
}

/// Squared error of the trained level over one episode.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpisodeStats {
    pub steps: usize,
    pub sq_err_sum: f64,
    pub disc_loss_sum: f64,
    pub gen_loss_sum: f64,
}

impl EpisodeStats {
    pub fn mean_sq_err(&self) -> f64 {
        self.sq_err_sum / self.steps.max(1) as f64
    }

    fn record(&mut self, r: &LossReport) {
        self.steps += 1;
        self.sq_err_sum += r.sq_err;
        self.disc_loss_sum += r.disc_loss;
        self.gen_loss_sum += r.gen_loss;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelLog {
    pub index: usize,
    pub episodes: Vec<EpisodeStats>,
}

impl LevelLog {
    /// Step-weighted mean squared error over the episode range.
    pub fn mean_sq_err(&self, range: core::ops::Range<usize>) -> f64 {
        let eps = &self.episodes[range];
        let steps: usize = eps.iter().map(|e| e.steps).sum();
        eps.iter().map(|e| e.sq_err_sum).sum::<f64>() / steps.max(1) as f64
    }

    /// Mean squared error over the first and the last tenth of episodes.
    pub fn first_last_decile(&self) -> (f64, f64) {
        let n = self.episodes.len();
        let d = (n / 10).max(1);
        (self.mean_sq_err(0..d), self.mean_sq_err(n - d..n))
    }
}

/// One training walk of level `level` over `series`.
///
/// Starting at `t = 0`, while `t ≤ L − i − 1`: predict with levels `1..=i`,
/// update level `i` against `x(t+i)`, move to the next sample time chosen by
/// the rule with `ρ = 0` and prediction length `i`. Levels below `i` must be
/// frozen and level `i` must not be.
pub fn train_episode(
    h: &mut Hierarchy,
    level: usize,
    series: &TimeSeries,
    gamma: f64,
) -> Result<EpisodeStats> {
    if level == 0 || level > h.depth() {
        return Err(Error::Usage("training level not present in hierarchy"));
    }
    if h.levels[level - 1].is_frozen() {
        return Err(Error::Usage("level is frozen"));
    }
    if h.levels[..level - 1].iter().any(|l| !l.is_frozen()) {
        return Err(Error::Usage(
            "lower levels must be frozen before training a level",
        ));
    }
    let cfg = DetectorConfig { gamma, rho: 0.0 };
    let (lower, upper) = h.levels.split_at_mut(level - 1);
    let current = &mut upper[0];
    let len = series.len();
    let mut stats = EpisodeStats::default();
    let mut s = Vec::with_capacity(level + 1);
    let mut t = 0;
    while t + level < len {
        s.clear();
        s.push(series[t]);
        for l in lower.iter() {
            let p = l.predict(&s)?;
            s.push(p);
        }
        let report = current.train_step(&s, series[t + level])?;
        stats.record(&report);
        s.push(report.prediction);
        let preds = PredictionSet {
            base: t,
            values: s[1..].to_vec(),
        };
        t = next_sample_time(&preds, series[t], &cfg);
    }
    Ok(stats)
}

/// Appends level `depth + 1`, trains it for `cfg.episodes` fresh episodes
/// and freezes it. `on_episode` sees every finished episode.
///
/// Level `i` draws its initialization and all of its episodes from the
/// stream `(seed, TrainLevel, i)`, so a depth-`n` hierarchy is a prefix of
/// any deeper one trained from the same seed.
pub fn train_level(
    h: &mut Hierarchy,
    cfg: &TrainConfig,
    on_episode: &mut dyn FnMut(usize, usize, &EpisodeStats),
) -> Result<LevelLog> {
    cfg.validate()?;
    let index = h.depth() + 1;
    if cfg.length < index + 2 {
        return Err(Error::Config("series length too short for this level"));
    }
    let mut rng: StreamRng = stream(cfg.seed, Domain::TrainLevel, index as u64);
    let mut level = GanLevel::new(index, &mut rng)?;
    level.set_learning_rate(cfg.lr);
    h.push(level)?;
    let mut log = LevelLog {
        index,
        episodes: Vec::with_capacity(cfg.episodes),
    };
    for episode in 0..cfg.episodes {
        let (_, series) = sample_episode(&cfg.ranges, cfg.length, &mut rng)?;
        let stats = train_episode(h, index, &series, cfg.gamma)?;
        on_episode(index, episode, &stats);
        log.episodes.push(stats);
    }
    h.levels[index - 1].freeze();
    Ok(log)
}

/// Trains levels `1..=N` one after another, freezing each when done.
pub fn train_hierarchy(cfg: &TrainConfig) -> Result<(Hierarchy, Vec<LevelLog>)> {
    train_hierarchy_with(cfg, &mut |_, _, _| {})
}

pub fn train_hierarchy_with(
    cfg: &TrainConfig,
    on_episode: &mut dyn FnMut(usize, usize, &EpisodeStats),
) -> Result<(Hierarchy, Vec<LevelLog>)> {
    cfg.validate()?;
    let mut h = Hierarchy::new();
    let mut logs = Vec::with_capacity(cfg.levels);
    for _ in 0..cfg.levels {
        logs.push(train_level(&mut h, cfg, on_episode)?);
    }
    Ok((h, logs))
}

/// Held-out prediction loss of every level after training.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLoss {
    /// Mean `(x̂(t+i) − x(t+i))²` per level, index 0 = level 1.
    pub mean_sq_err: Vec<f64>,
    pub points: usize,
}

/// Feeds fresh series to the frozen detector (`ρ = 0`) and records the
/// squared error of every level at each visited sample until `points`
/// prediction instants have been scored.
pub fn evaluate_level_losses(
    h: &Hierarchy,
    points: usize,
    length: usize,
    ranges: &ParamRanges,
    gamma: f64,
    seed: u64,
) -> Result<LevelLoss> {
    let n = h.depth();
    if n == 0 || points == 0 || length < n + 2 {
        return Err(Error::Config("invalid level-loss evaluation settings"));
    }
    let cfg = DetectorConfig { gamma, rho: 0.0 };
    let mut sums = alloc::vec![0.0; n];
    let mut seen = 0;
    let mut episode = 0u64;
    while seen < points {
        let mut rng = stream(seed, Domain::Evaluation, episode);
        episode += 1;
        let (_, series) = sample_episode(ranges, length, &mut rng)?;
        let mut t = 0;
        while t + n < series.len() && seen < points {
            let preds = h.predict_cascade(t, series[t])?;
            for (k, p) in preds.values.iter().enumerate() {
                let e = p - series[t + k + 1];
                sums[k] += e * e;
            }
            seen += 1;
            t = next_sample_time(&preds, series[t], &cfg);
        }
    }
    Ok(LevelLoss {
        mean_sq_err: sums.into_iter().map(|s| s / seen as f64).collect(),
        points: seen,
    })
}
