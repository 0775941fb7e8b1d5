//! Batch front end for the value-added network pipeline.
//!
//! `valnet <stage> --config run.json --out results/` runs one stage for every
//! year listed in the configuration; `valnet all` runs them in order.

pub mod config;
pub mod output;
pub mod stages;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::output::Stage;
use crate::stages::{plan_jobs, run_stages, Context, RunSummary, ALL_STAGES};

pub const WORKERS_ENV: &str = "VALNET_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "valnet",
    version,
    about = "Value-added network analysis of input-output tables"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Recompute stages whose outputs are up to date.
    #[arg(long, global = true)]
    pub force: bool,
    /// Treat accounting-identity violations as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Remove a country before building networks; repeatable.
    #[arg(long = "drop", global = true, value_name = "COUNTRY")]
    pub drop: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Leontief system, GVAN and IVAN.
    Build,
    /// Threshold scan and community partition.
    Communities,
    /// Helmholtz-Hodge decomposition of each large community.
    Decompose,
    /// Structural statistics of the IVAN.
    Metrics,
    /// Integration index per community and sector.
    Integrate,
    /// Every stage in order.
    All,
}

impl Command {
    pub fn stages(self) -> Vec<Stage> {
        match self {
            Command::Build => vec![Stage::Build],
            Command::Communities => vec![Stage::Communities],
            Command::Decompose => vec![Stage::Decompose],
            Command::Metrics => vec![Stage::Metrics],
            Command::Integrate => vec![Stage::Integrate],
            Command::All => ALL_STAGES.to_vec(),
        }
    }
}

/// Worker count from the environment, or the available parallelism.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{WORKERS_ENV}={v} is not a count"))?;
            if n == 0 {
                bail!("{WORKERS_ENV} must be at least 1");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads the configuration, applies the command-line overrides and runs the
/// requested stages on a pool of `workers` threads.
pub fn execute(cli: &Cli, workers: usize) -> Result<RunSummary> {
    let config_path = cli.config.as_deref().context("--config is required")?;
    let mut config = RunConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    config.strict |= cli.strict;
    for c in &cli.drop {
        if !config.drop_countries.contains(c) {
            config.drop_countries.push(c.clone());
        }
    }
    let out = match (&cli.out, &config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => resolve(base, o),
        (None, None) => bail!("no output directory: pass --out or set output_dir"),
    };
    let manifests: Vec<PathBuf> = config.manifests.iter().map(|m| resolve(base, m)).collect();
    let (jobs, mut outcomes) = plan_jobs(&manifests)?;
    for (label, r) in &outcomes {
        if let Err(e) = r {
            log::error!("{label}: {e:#}");
        }
    }

    let ctx = Context::new(config, out, cli.force);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting worker pool")?;
    outcomes.extend(pool.install(|| run_stages(&ctx, &jobs, &cli.command.stages()))?);
    Ok(RunSummary { outcomes })
}
