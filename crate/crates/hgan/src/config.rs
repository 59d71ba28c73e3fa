//! Experiment configuration.
//!
//! Files are flat `key = value` lines; `#` starts a comment, lists are
//! comma separated. Keys may use `-` or `_`. Every key can also be set from
//! the command line with a flag of the same name.

use std::fs;
use std::path::{Path, PathBuf};

use hgan_core::hierarchy::{DetectorConfig, TrainConfig};
use hgan_core::nn::Adam;
use hgan_core::process::ParamRanges;

use crate::{Error, Result};

pub const PAPER_SCALE_TEST_EPISODES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Long-run mean of the process; only `0` is supported.
    pub mu: f64,
    pub gamma: f64,
    /// Sampling cost used by the fixed-cost baseline.
    pub c_s: f64,
    pub rho_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub episodes_train: usize,
    pub episodes_test: usize,
    pub length: usize,
    /// Prediction instants scored when measuring loss per level.
    pub eval_points: usize,
    pub lr: f64,
    pub seed: u64,
    pub online: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let r = ParamRanges::default();
        Self {
            theta_min: r.theta_min,
            theta_max: r.theta_max,
            sigma_min: r.sigma_min,
            sigma_max: r.sigma_max,
            mu: 0.0,
            gamma: 0.0,
            c_s: 0.1,
            rho_grid: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            n_grid: vec![1, 5, 10, 15, 20],
            episodes_train: 5000,
            episodes_test: 500,
            length: 1000,
            eval_points: 10_000,
            lr: Adam::DEFAULT_LR,
            seed: 1,
            online: true,
            out: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "theta_min",
    "theta_max",
    "sigma_min",
    "sigma_max",
    "mu",
    "gamma",
    "c_s",
    "rho_grid",
    "n_grid",
    "episodes_train",
    "episodes_test",
    "length",
    "eval_points",
    "lr",
    "seed",
    "online",
    "out",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected a boolean, got {v:?}"
        ))),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(crate::error::io_err(path))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::ConfigSyntax {
                    line: i + 1,
                    msg: format!("expected `key = value`, got {line:?}"),
                });
            };
            self.set(k, v).map_err(|e| match e {
                Error::Config(msg) => Error::ConfigSyntax { line: i + 1, msg },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        match k {
            "theta_min" => self.theta_min = parse_num(k, value)?,
            "theta_max" => self.theta_max = parse_num(k, value)?,
            "sigma_min" => self.sigma_min = parse_num(k, value)?,
            "sigma_max" => self.sigma_max = parse_num(k, value)?,
            "mu" => self.mu = parse_num(k, value)?,
            "gamma" => self.gamma = parse_num(k, value)?,
            "c_s" => self.c_s = parse_num(k, value)?,
            "rho_grid" => self.rho_grid = parse_list(k, value)?,
            "n_grid" => self.n_grid = parse_list(k, value)?,
            "episodes_train" => self.episodes_train = parse_num(k, value)?,
            "episodes_test" => self.episodes_test = parse_num(k, value)?,
            "length" => self.length = parse_num(k, value)?,
            "eval_points" => self.eval_points = parse_num(k, value)?,
            "lr" => self.lr = parse_num(k, value)?,
            "seed" => self.seed = parse_num(k, value)?,
            "online" => self.online = parse_bool(k, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            _ => return Err(Error::Config(format!("unknown key {k:?}"))),
        }
        Ok(())
    }

    pub fn ranges(&self) -> Result<ParamRanges> {
        Ok(ParamRanges::new(
            self.theta_min,
            self.theta_max,
            self.sigma_min,
            self.sigma_max,
        )?)
    }

    pub fn max_n(&self) -> usize {
        self.n_grid.iter().copied().max().unwrap_or(0)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            levels: self.max_n(),
            episodes: self.episodes_train,
            length: self.length,
            ranges: self.ranges()?,
            gamma: self.gamma,
            seed: self.seed,
            lr: self.lr,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu != 0.0 {
            return Err(Error::Config("mu: only a zero mean is supported".into()));
        }
        self.ranges()?;
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config("n_grid: needs at least one N >= 1".into()));
        }
        if self.rho_grid.is_empty() {
            return Err(Error::Config("rho_grid: empty".into()));
        }
        for &rho in &self.rho_grid {
            DetectorConfig::new(self.gamma, rho)?;
        }
        if !(self.c_s.is_finite() && self.c_s > 0.0) {
            return Err(Error::Config("c_s: must be > 0".into()));
        }
        if self.length < self.max_n() + 2 {
            return Err(Error::Config("length: must exceed max N + 1".into()));
        }
        if self.episodes_test == 0 {
            return Err(Error::Config("episodes_test: must be >= 1".into()));
        }
        if self.eval_points == 0 {
            return Err(Error::Config("eval_points: must be >= 1".into()));
        }
        Ok(())
    }

    /// Writes the config in the same format [`ExperimentConfig::apply_text`] reads.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        format!(
            "theta_min = {}\ntheta_max = {}\nsigma_min = {}\nsigma_max = {}\nmu = {}\n\
             gamma = {}\nc_s = {}\nrho_grid = {}\nn_grid = {}\nepisodes_train = {}\n\
             episodes_test = {}\nlength = {}\neval_points = {}\nlr = {}\nseed = {}\n\
             online = {}\nout = {}\n",
            self.theta_min,
            self.theta_max,
            self.sigma_min,
            self.sigma_max,
            self.mu,
            self.gamma,
            self.c_s,
            join(self.rho_grid.iter().map(f64::to_string).collect()),
            join(self.n_grid.iter().map(usize::to_string).collect()),
            self.episodes_train,
            self.episodes_test,
            self.length,
            self.eval_points,
            self.lr,
            self.seed,
            self.online,
            self.out.display(),
        )
    }
}
