//! Train / sweep / demo drivers.
//!
//! Every random draw comes from a stream keyed by the master seed and a
//! domain, so runs are reproducible and detectors are scored on identical
//! series for each test-episode index.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hgan_core::baseline::{run_baseline_episode, BaselineConfig};
use hgan_core::hierarchy::{
    evaluate_level_losses, run_test_episode, train_hierarchy_with, DetectorConfig, EpisodeStats,
    Hierarchy,
};
use hgan_core::metrics::{aggregate, score_trace, EpisodeMetrics};
use hgan_core::process::{sample_episode, OuParams, TimeSeries};
use hgan_core::rng::{stream, Domain};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::io_err;
use crate::persist::{load_weights, save_weights};
use crate::{Error, Result};

pub const SWEEP_HEADER: &str =
    "detector,rho,n,mean_delay,miss_rate,mean_cost,sampling_ratio,n_crossings,seed";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const LEVEL_LOSS_FILE: &str = "level_loss.csv";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const DEMO_FILE: &str = "demo.csv";

pub fn weight_file_name(n: usize) -> String {
    format!("hierarchy_n{n}.ousg")
}

/// One aggregated cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `baseline` or `gan-N`.
    pub detector: String,
    pub rho: f64,
    /// `None` for the baseline.
    pub n: Option<usize>,
    pub mean_delay: Option<f64>,
    pub miss_rate: Option<f64>,
    pub mean_cost: f64,
    pub sampling_ratio: f64,
    pub n_crossings: usize,
    pub seed: u64,
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.detector,
            self.rho,
            opt(self.n),
            opt(self.mean_delay),
            opt(self.miss_rate),
            self.mean_cost,
            self.sampling_ratio,
            self.n_crossings,
            self.seed
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

#[derive(Debug)]
pub struct TrainOutput {
    /// `(N, hierarchy)` for every N in the grid, ascending.
    pub hierarchies: Vec<(usize, Hierarchy)>,
    pub weight_files: Vec<PathBuf>,
    pub level_loss_csv: PathBuf,
    pub train_log_csv: PathBuf,
}

/// Trains hierarchies for every N in the grid without touching the disk.
///
/// Level `i` depends only on levels `1..i` and its own RNG stream, so the
/// deepest hierarchy is trained once and each smaller N is its prefix.
pub fn train_hierarchies(
    cfg: &ExperimentConfig,
    on_episode: &mut dyn FnMut(usize, usize, &EpisodeStats),
) -> Result<Vec<(usize, Hierarchy)>> {
    cfg.validate()?;
    let (full, _) = train_hierarchy_with(&cfg.train_config()?, on_episode)?;
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    grid.into_iter()
        .map(|n| Ok((n, full.truncated(n)?)))
        .collect()
}

/// Mean squared error per level for each trained N, as CSV
/// `n,level,mean_sq_err,points`.
pub fn level_loss_csv(
    cfg: &ExperimentConfig,
    hierarchies: &[(usize, Hierarchy)],
) -> Result<String> {
    let ranges = cfg.ranges()?;
    let losses = hierarchies
        .par_iter()
        .map(|(n, h)| {
            evaluate_level_losses(h, cfg.eval_points, cfg.length, &ranges, cfg.gamma, cfg.seed)
                .map(|l| (*n, l))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut s = String::from("n,level,mean_sq_err,points\n");
    for (n, l) in losses {
        for (k, e) in l.mean_sq_err.iter().enumerate() {
            writeln!(s, "{n},{},{e},{}", k + 1, l.points).unwrap();
        }
    }
    Ok(s)
}

pub fn cmd_train(cfg: &ExperimentConfig, progress: &mut dyn FnMut(&str)) -> Result<TrainOutput> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let mut log = String::from("level,episode,steps,mean_sq_err,mean_disc_loss,mean_gen_loss\n");
    let every = (cfg.episodes_train / 10).max(1);
    let hierarchies = train_hierarchies(cfg, &mut |level, ep, st| {
        let steps = st.steps.max(1) as f64;
        writeln!(
            log,
            "{level},{ep},{},{},{},{}",
            st.steps,
            st.mean_sq_err(),
            st.disc_loss_sum / steps,
            st.gen_loss_sum / steps
        )
        .unwrap();
        if (ep + 1) % every == 0 {
            progress(&format!(
                "level {level}: episode {}/{} mse {:.4}",
                ep + 1,
                cfg.episodes_train,
                st.mean_sq_err()
            ));
        }
    })?;

    let mut weight_files = Vec::new();
    for (n, h) in &hierarchies {
        let path = cfg.out.join(weight_file_name(*n));
        save_weights(h, &path)?;
        weight_files.push(path);
    }
    let train_log_csv = cfg.out.join(TRAIN_LOG_FILE);
    write(&train_log_csv, &log)?;
    progress("evaluating per-level loss");
    let loss_path = cfg.out.join(LEVEL_LOSS_FILE);
    write(&loss_path, &level_loss_csv(cfg, &hierarchies)?)?;
    Ok(TrainOutput {
        hierarchies,
        weight_files,
        level_loss_csv: loss_path,
        train_log_csv,
    })
}

/// Loads `hierarchy_nN.ousg` from `dir` for every N in the grid.
pub fn load_hierarchies(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<(usize, Hierarchy)>> {
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    grid.into_iter()
        .map(|n| {
            let path = dir.join(weight_file_name(n));
            if !path.is_file() {
                return Err(Error::MissingWeights { n, path });
            }
            let h = load_weights(&path)?;
            if h.depth() != n {
                return Err(Error::Config(format!(
                    "{} holds {} levels, expected N = {n}",
                    path.display(),
                    h.depth()
                )));
            }
            Ok((n, h))
        })
        .collect()
}

/// The test series for episode `index`; shared by every detector.
pub fn test_episode(cfg: &ExperimentConfig, index: u64) -> Result<(OuParams, TimeSeries)> {
    let mut rng = stream(cfg.seed, Domain::TestEpisode, index);
    Ok(sample_episode(&cfg.ranges()?, cfg.length, &mut rng)?)
}

fn score(series: &TimeSeries, times: &[usize], gamma: f64) -> Result<EpisodeMetrics> {
    Ok(score_trace(series.values(), times, gamma)?)
}

/// Runs the full (baseline + every N × ρ) sweep over `episodes_test`
/// paired episodes and aggregates one row per cell.
pub fn sweep_rows(
    cfg: &ExperimentConfig,
    hierarchies: &[(usize, Hierarchy)],
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let detectors: Vec<DetectorConfig> = cfg
        .rho_grid
        .iter()
        .map(|&rho| DetectorConfig::new(cfg.gamma, rho))
        .collect::<std::result::Result<_, _>>()?;
    let n_cells = hierarchies.len() * detectors.len();

    // Per episode: baseline metrics, then one entry per (N, ρ) cell.
    let per_episode: Vec<(EpisodeMetrics, Vec<EpisodeMetrics>)> = (0..cfg.episodes_test as u64)
        .into_par_iter()
        .map(|e| -> Result<_> {
            let (params, series) = test_episode(cfg, e)?;
            let bcfg = BaselineConfig::new(cfg.c_s, params, cfg.gamma)?;
            let base = score(
                &series,
                &run_baseline_episode(&series, &bcfg).times,
                cfg.gamma,
            )?;
            let mut cells = Vec::with_capacity(n_cells);
            for (_, h) in hierarchies {
                for det in &detectors {
                    let trace = if cfg.online {
                        run_test_episode(&mut h.clone(), &series, det, true)?
                    } else {
                        h.run_offline(&series, det)?
                    };
                    cells.push(score(&series, &trace.times, cfg.gamma)?);
                }
            }
            Ok((base, cells))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(n_cells + detectors.len());
    let base: Vec<EpisodeMetrics> = per_episode.iter().map(|(b, _)| b.clone()).collect();
    let base = aggregate(&base)?;
    for det in &detectors {
        rows.push(SweepRow {
            detector: "baseline".into(),
            rho: det.rho,
            n: None,
            mean_delay: base.mean_delay,
            miss_rate: base.miss_rate,
            mean_cost: base.mean_cost,
            sampling_ratio: base.mean_sampling_ratio,
            n_crossings: base.n_crossings,
            seed: cfg.seed,
        });
    }
    for (hi, (n, _)) in hierarchies.iter().enumerate() {
        for (di, det) in detectors.iter().enumerate() {
            let cell = hi * detectors.len() + di;
            let ms: Vec<EpisodeMetrics> =
                per_episode.iter().map(|(_, c)| c[cell].clone()).collect();
            let s = aggregate(&ms)?;
            rows.push(SweepRow {
                detector: format!("gan-{n}"),
                rho: det.rho,
                n: Some(*n),
                mean_delay: s.mean_delay,
                miss_rate: s.miss_rate,
                mean_cost: s.mean_cost,
                sampling_ratio: s.mean_sampling_ratio,
                n_crossings: s.n_crossings,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

/// Loads weights from `weights` and writes `sweep.csv` into the output dir.
pub fn cmd_sweep(cfg: &ExperimentConfig, weights: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let hierarchies = load_hierarchies(cfg, weights)?;
    let rows = sweep_rows(cfg, &hierarchies)?;
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(SWEEP_FILE);
    write(&path, &sweep_csv(&rows))?;
    Ok(path)
}

/// One demo episode: the series and, for each detector, a 0/1 column
/// marking sample instants.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoTrace {
    pub series: TimeSeries,
    /// Column name and sample times.
    pub detectors: Vec<(String, Vec<usize>)>,
}

impl DemoTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x");
        for (name, _) in &self.detectors {
            write!(s, ",{name}").unwrap();
        }
        s.push('\n');
        let flags: Vec<Vec<bool>> = self
            .detectors
            .iter()
            .map(|(_, times)| {
                let len = self.series.len();
                let mut f = vec![false; len];
                for &t in times.iter().filter(|&&t| t < len) {
                    f[t] = true;
                }
                f
            })
            .collect();
        for (t, x) in self.series.values().iter().enumerate() {
            write!(s, "{t},{x}").unwrap();
            for f in &flags {
                s.push_str(if f[t] { ",1" } else { ",0" });
            }
            s.push('\n');
        }
        s
    }
}

pub fn demo_trace(cfg: &ExperimentConfig, hierarchies: &[(usize, Hierarchy)]) -> Result<DemoTrace> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, Domain::Demo, 0);
    let (params, series) = sample_episode(&cfg.ranges()?, cfg.length, &mut rng)?;
    let bcfg = BaselineConfig::new(cfg.c_s, params, cfg.gamma)?;
    let mut detectors = vec![(
        "baseline".to_string(),
        run_baseline_episode(&series, &bcfg).times,
    )];
    for (n, h) in hierarchies {
        for &rho in &cfg.rho_grid {
            let det = DetectorConfig::new(cfg.gamma, rho)?;
            let trace = run_test_episode(&mut h.clone(), &series, &det, cfg.online)?;
            detectors.push((format!("gan-{n}-rho{rho}"), trace.times));
        }
    }
    Ok(DemoTrace { series, detectors })
}

pub fn series_text(series: &TimeSeries) -> String {
    let mut s = String::with_capacity(series.len() * 20);
    for x in series.values() {
        writeln!(s, "{x}").unwrap();
    }
    s
}

/// Writes `demo.csv` and, if requested, the raw series one value per line.
pub fn cmd_demo(
    cfg: &ExperimentConfig,
    weights: &Path,
    dump_series: Option<&Path>,
) -> Result<PathBuf> {
    cfg.validate()?;
    let hierarchies = load_hierarchies(cfg, weights)?;
    let trace = demo_trace(cfg, &hierarchies)?;
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(DEMO_FILE);
    write(&path, &trace.to_csv())?;
    if let Some(p) = dump_series {
        write(p, &series_text(&trace.series))?;
    }
    Ok(path)
}
