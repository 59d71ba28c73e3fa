use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hgan::config::{ExperimentConfig, PAPER_SCALE_TEST_EPISODES};
use hgan::harness;

#[derive(Parser)]
#[command(
    name = "hgan",
    version,
    about = "Threshold-crossing detection with a hierarchy of GAN predictors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one hierarchy per N in the grid and write weights plus loss logs.
    Train(Common),
    /// Score baseline and GAN detectors on paired test episodes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Directory holding hierarchy_nN.ousg files (defaults to --out).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Dump one episode with every detector's sample instants.
    Demo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also write the raw series, one value per line.
        #[arg(long, value_name = "PATH")]
        dump_series: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// key = value config file; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Use 10000 test episodes.
    #[arg(long)]
    paper_scale: bool,
    /// Comma-separated prediction lengths.
    #[arg(long)]
    n_grid: Option<String>,
    /// Comma-separated buffer widths.
    #[arg(long)]
    rho_grid: Option<String>,
    /// Training episodes per level for `train`, test episodes otherwise.
    #[arg(long)]
    episodes: Option<String>,

    #[arg(long)]
    theta_min: Option<String>,
    #[arg(long)]
    theta_max: Option<String>,
    #[arg(long)]
    sigma_min: Option<String>,
    #[arg(long)]
    sigma_max: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    c_s: Option<String>,
    #[arg(long)]
    episodes_train: Option<String>,
    #[arg(long)]
    episodes_test: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    eval_points: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    /// true or false.
    #[arg(long)]
    online: Option<String>,
}

impl Common {
    fn resolve(&self, training: bool) -> hgan::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            cfg.episodes_test = PAPER_SCALE_TEST_EPISODES;
        }
        let episodes_key = if training {
            "episodes_train"
        } else {
            "episodes_test"
        };
        let overrides = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("n_grid", &self.n_grid),
            ("rho_grid", &self.rho_grid),
            (episodes_key, &self.episodes),
            ("theta_min", &self.theta_min),
            ("theta_max", &self.theta_max),
            ("sigma_min", &self.sigma_min),
            ("sigma_max", &self.sigma_max),
            ("mu", &self.mu),
            ("gamma", &self.gamma),
            ("c_s", &self.c_s),
            ("episodes_train", &self.episodes_train),
            ("episodes_test", &self.episodes_test),
            ("length", &self.length),
            ("eval_points", &self.eval_points),
            ("lr", &self.lr),
            ("online", &self.online),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> hgan::Result<()> {
    match cli.command {
        Command::Train(common) => {
            let cfg = common.resolve(true)?;
            let out = harness::cmd_train(&cfg, &mut |msg| eprintln!("{msg}"))?;
            for p in &out.weight_files {
                println!("{}", p.display());
            }
            println!("{}", out.level_loss_csv.display());
            println!("{}", out.train_log_csv.display());
        }
        Command::Sweep { common, weights } => {
            let cfg = common.resolve(false)?;
            let weights = weights.unwrap_or_else(|| cfg.out.clone());
            println!("{}", harness::cmd_sweep(&cfg, &weights)?.display());
        }
        Command::Demo {
            common,
            weights,
            dump_series,
        } => {
            let cfg = common.resolve(false)?;
            let weights = weights.unwrap_or_else(|| cfg.out.clone());
            let path = harness::cmd_demo(&cfg, &weights, dump_series.as_deref())?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
