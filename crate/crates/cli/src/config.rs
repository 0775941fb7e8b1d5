//! Run configuration: one JSON file holds every tunable of the pipeline.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use valnet_core::community::{DetectOptions, ScanOptions, TeleportMode};
use valnet_core::hhd::{LaplacianSolver, RankingMode};
use valnet_core::ingest::{LoadOptions, RegionMap};
use valnet_core::integration::{DenominatorScope, PipelineConfig};
use valnet_core::metrics::LogBase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRange {
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
}

impl Default for ScanRange {
    fn default() -> Self {
        ScanRange {
            k_min: 6500,
            k_max: 11000,
            k_step: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// One manifest per year; relative paths resolve against the config file.
    pub manifests: Vec<PathBuf>,
    pub drop_countries: Vec<String>,
    /// Country to region map; the WIOD Europe / Pacific Rim split when absent.
    pub regions: Option<RegionMap>,
    /// `None` detects communities on the unthresholded network.
    pub scan: Option<ScanRange>,
    /// Communities with more nodes than this are "large".
    pub size_floor: usize,
    pub teleport_prob: f64,
    pub teleport_mode: TeleportMode,
    pub seeds: usize,
    pub rng_seed: u64,
    pub hhd_solver: LaplacianSolver,
    pub ranking_mode: RankingMode,
    pub log_base: LogBase,
    pub denominator: DenominatorScope,
    pub strict: bool,
    pub rel_tol: f64,
    /// Links in the circular-flow graph exports.
    pub top_k_export: usize,
    /// Entries in each ranking table.
    pub top_rank: usize,
    /// Not part of the hash or the echoed configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifests: Vec::new(),
            drop_countries: Vec::new(),
            regions: None,
            scan: Some(ScanRange::default()),
            size_floor: 240,
            teleport_prob: 0.15,
            teleport_mode: TeleportMode::Recorded,
            seeds: 10,
            rng_seed: 0,
            hhd_solver: LaplacianSolver::Auto,
            ranking_mode: RankingMode::AggregateThenDecompose,
            log_base: LogBase::Natural,
            denominator: DenominatorScope::Community,
            strict: false,
            rel_tol: 1e-6,
            top_k_export: 20,
            top_rank: 5,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(!self.manifests.is_empty(), "config lists no manifests");
        anyhow::ensure!(
            self.teleport_prob > 0.0 && self.teleport_prob < 1.0,
            "teleport_prob must lie in (0, 1)"
        );
        anyhow::ensure!(self.seeds >= 1, "seeds must be at least 1");
        anyhow::ensure!(self.rel_tol > 0.0, "rel_tol must be positive");
        if let Some(s) = &self.scan {
            anyhow::ensure!(
                s.k_step >= 1 && s.k_min >= 1 && s.k_min <= s.k_max,
                "invalid scan range"
            );
        }
        Ok(())
    }

    /// The configuration as echoed into output metadata: canonical JSON
    /// without the output directory.
    pub fn echo(&self) -> String {
        let mut echoed = self.clone();
        echoed.output_dir = None;
        serde_json::to_string(&echoed).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.echo().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn region_map(&self) -> RegionMap {
        self.regions.clone().unwrap_or_else(RegionMap::wiod)
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            rel_tol: self.rel_tol,
            strict: self.strict,
        }
    }

    pub fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            teleport_prob: self.teleport_prob,
            teleport_mode: self.teleport_mode,
            seeds: self.seeds,
            rng_seed: self.rng_seed,
        }
    }

    pub fn scan_options(&self) -> Option<ScanOptions> {
        self.scan.as_ref().map(|s| ScanOptions {
            k_min: s.k_min,
            k_max: s.k_max,
            k_step: s.k_step,
            size_floor: self.size_floor,
        })
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            drop_countries: self.drop_countries.clone(),
            scan: self.scan_options(),
            size_floor: self.size_floor,
            detect: self.detect_options(),
            denominator: self.denominator,
            regions: self.region_map(),
        }
    }
}
