//! Economic integration index.
//!
//! For a community `C`, `E = sum_{i<j in C} |Y^(c)_ij| / sum_{i,j in C} G_ij`:
//! cross-border circular value-added flow (from the decomposition of the
//! international network restricted to `C`) per unit of total value-added
//! flow among the community's nodes, domestic flows included. The sectoral
//! index `E_k` restricts both sums to the community's nodes in sector `k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{
    label_regions, partition_at, threshold_scan, CommunityRegions, DetectOptions, ScanOptions, ScanResult,
    ThresholdPartition,
};
use crate::error::{Error, Result};
use crate::hhd::{decompose, HodgeDecomposition};
use crate::ingest::{drop_regions, IoTable, RegionMap};
use crate::network::{FlowNetwork, NetworkKind};
use crate::van::{build_gvan, build_ivan, build_leontief};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CirculationMode {
    #[default]
    NetOnly,
    NetPlusBilateral,
}

impl CirculationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CirculationMode::NetOnly => "net-only",
            CirculationMode::NetPlusBilateral => "net-plus-bilateral",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorScope {
    /// GVAN flows among community nodes.
    #[default]
    Community,
    /// All GVAN flows.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexValue {
    pub numerator: f64,
    pub denominator: f64,
    /// `numerator / denominator`; absent when the denominator is zero.
    pub value: Option<f64>,
}

impl IndexValue {
    fn new(numerator: f64, denominator: f64) -> Self {
        IndexValue {
            numerator,
            denominator,
            value: (denominator > 0.0).then(|| numerator / denominator),
        }
    }

    fn absent() -> Self {
        IndexValue {
            numerator: 0.0,
            denominator: 0.0,
            value: None,
        }
    }
}

fn check_alignment(decomp: &HodgeDecomposition, gvan: &FlowNetwork, community: &[usize]) -> Result<()> {
    if decomp.len() != community.len() {
        return Err(Error::Dimension(format!(
            "decomposition has {} nodes, community {}",
            decomp.len(),
            community.len()
        )));
    }
    for (a, &i) in community.iter().enumerate() {
        if i >= gvan.len() || gvan.nodes[i] != decomp.nodes[a] {
            return Err(Error::Dimension(format!(
                "community node {a} does not match GVAN node {i}"
            )));
        }
    }
    Ok(())
}

/// Circular magnitude over unordered pairs among `local` decomposition indices.
fn circular_sum(decomp: &HodgeDecomposition, local: &[usize], mode: CirculationMode) -> f64 {
    let mut total = 0.0;
    for (x, &a) in local.iter().enumerate() {
        for &b in &local[x + 1..] {
            total += decomp.circular[(a, b)].abs();
            if mode == CirculationMode::NetPlusBilateral {
                total += decomp.bilateral[(a, b)];
            }
        }
    }
    total
}

fn gvan_sum(gvan: &FlowNetwork, nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .map(|&i| nodes.iter().map(|&j| gvan.weights[(i, j)]).sum::<f64>())
        .sum()
}

/// `decomp` must be the decomposition of the international network restricted
/// to `community` (indices into `gvan`, same order).
pub fn integration_index(
    decomp: &HodgeDecomposition,
    gvan: &FlowNetwork,
    community: &[usize],
    mode: CirculationMode,
    scope: DenominatorScope,
) -> Result<IndexValue> {
    check_alignment(decomp, gvan, community)?;
    let local: Vec<usize> = (0..community.len()).collect();
    let numerator = circular_sum(decomp, &local, mode);
    let denominator = match scope {
        DenominatorScope::Community => gvan_sum(gvan, community),
        DenominatorScope::Global => gvan.total_weight(),
    };
    Ok(IndexValue::new(numerator, denominator))
}

/// `E_k` over the community members whose sector is `sector`; absent when
/// fewer than two members are in the sector.
pub fn sectoral_index(
    decomp: &HodgeDecomposition,
    gvan: &FlowNetwork,
    community: &[usize],
    sector: &str,
    mode: CirculationMode,
) -> Result<IndexValue> {
    check_alignment(decomp, gvan, community)?;
    let local: Vec<usize> = (0..community.len())
        .filter(|&a| decomp.nodes[a].sector == sector)
        .collect();
    if local.len() < 2 {
        return Ok(IndexValue::absent());
    }
    let global: Vec<usize> = local.iter().map(|&a| community[a]).collect();
    Ok(IndexValue::new(
        circular_sum(decomp, &local, mode),
        gvan_sum(gvan, &global),
    ))
}

/// Sectors present in the community, in order of first appearance.
pub fn community_sectors(decomp: &HodgeDecomposition) -> Vec<String> {
    let mut seen = Vec::new();
    for l in &decomp.nodes {
        if !seen.contains(&l.sector) {
            seen.push(l.sector.clone());
        }
    }
    seen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub year: i32,
    pub community: usize,
    pub region: Option<String>,
    pub size: usize,
    pub mode: CirculationMode,
    pub index: IndexValue,
    pub sectoral: BTreeMap<String, IndexValue>,
}

pub fn community_report(
    year: i32,
    community: usize,
    region: Option<String>,
    decomp: &HodgeDecomposition,
    gvan: &FlowNetwork,
    members: &[usize],
    mode: CirculationMode,
    scope: DenominatorScope,
) -> Result<IntegrationReport> {
    let index = integration_index(decomp, gvan, members, mode, scope)?;
    let mut sectoral = BTreeMap::new();
    for sector in community_sectors(decomp) {
        let e_k = sectoral_index(decomp, gvan, members, &sector, mode)?;
        sectoral.insert(sector, e_k);
    }
    Ok(IntegrationReport {
        year,
        community,
        region,
        size: members.len(),
        mode,
        index,
        sectoral,
    })
}

/// Settings for the per-year pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub drop_countries: Vec<String>,
    /// `None` runs detection on the unthresholded network.
    pub scan: Option<ScanOptions>,
    pub size_floor: usize,
    pub detect: DetectOptions,
    pub denominator: DenominatorScope,
    pub regions: RegionMap,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            drop_countries: Vec::new(),
            scan: None,
            size_floor: 0,
            detect: DetectOptions::default(),
            denominator: DenominatorScope::Community,
            regions: RegionMap::wiod(),
        }
    }
}

pub struct Networks {
    pub table: IoTable,
    pub gvan: FlowNetwork,
    pub ivan: FlowNetwork,
    pub clamped_links: usize,
}

pub fn build_networks(table: &IoTable, drop_countries: &[String]) -> Result<Networks> {
    let table = if drop_countries.is_empty() {
        table.clone()
    } else {
        drop_regions(table, &drop_countries.iter().cloned().collect())?
    };
    let system = build_leontief(&table)?;
    let (gvan, clamped_links) = build_gvan(&system);
    let ivan = build_ivan(&gvan, table.n_sectors())?;
    Ok(Networks {
        table,
        gvan,
        ivan,
        clamped_links,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub scan: Option<ScanResult>,
    /// Threshold actually used; the full link count when no scan was run or
    /// the scan found no `k` with two large communities.
    pub k_used: usize,
    pub partition: ThresholdPartition,
}

pub fn select_communities(
    ivan: &FlowNetwork,
    scan: Option<&ScanOptions>,
    detect: &DetectOptions,
) -> Result<Selection> {
    let all_links = ivan.link_count().max(1);
    let scan_result = scan.map(|s| threshold_scan(ivan, s, detect)).transpose()?;
    let k_used = scan_result
        .as_ref()
        .and_then(|s| s.selected_k)
        .unwrap_or(all_links);
    let partition = partition_at(ivan, k_used, detect)?;
    Ok(Selection {
        scan: scan_result,
        k_used,
        partition,
    })
}

pub struct CommunityAnalysis {
    pub id: usize,
    pub members: Vec<usize>,
    pub regions: CommunityRegions,
    pub decomposition: HodgeDecomposition,
    pub reports: Vec<IntegrationReport>,
}

pub struct YearAnalysis {
    pub year: i32,
    pub networks: Networks,
    pub selection: Selection,
    pub communities: Vec<CommunityAnalysis>,
}

pub fn analyze_community(
    year: i32,
    networks: &Networks,
    id: usize,
    members: Vec<usize>,
    regions: CommunityRegions,
    scope: DenominatorScope,
) -> Result<CommunityAnalysis> {
    let sub = networks
        .ivan
        .subnetwork(&members, NetworkKind::Subnetwork(format!("community-{id}")));
    let decomposition = decompose(&sub);
    let reports = [CirculationMode::NetOnly, CirculationMode::NetPlusBilateral]
        .into_iter()
        .map(|mode| {
            community_report(
                year,
                id,
                regions.dominant_region.clone(),
                &decomposition,
                &networks.gvan,
                &members,
                mode,
                scope,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommunityAnalysis {
        id,
        members,
        regions,
        decomposition,
        reports,
    })
}

/// Build, select communities, decompose and index one year.
pub fn analyze_year(table: &IoTable, config: &PipelineConfig) -> Result<YearAnalysis> {
    let networks = build_networks(table, &config.drop_countries)?;
    let selection = select_communities(&networks.ivan, config.scan.as_ref(), &config.detect)?;
    let labels: Vec<_> = selection
        .partition
        .nodes
        .iter()
        .map(|&i| networks.ivan.nodes[i].clone())
        .collect();
    let regions = label_regions(&selection.partition.partition, &labels, &config.regions);
    let communities = selection
        .partition
        .large_communities(config.size_floor)
        .into_iter()
        .map(|(id, members)| {
            analyze_community(
                networks.table.year,
                &networks,
                id,
                members,
                regions[id].clone(),
                config.denominator,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(YearAnalysis {
        year: networks.table.year,
        networks,
        selection,
        communities,
    })
}

/// Runs [`analyze_year`] on every table in parallel. A failing year is
/// logged and reported as `Err` in its slot; the others proceed.
pub fn integration_series(
    tables: &[IoTable],
    config: &PipelineConfig,
) -> Vec<(i32, Result<Vec<IntegrationReport>>)> {
    tables
        .par_iter()
        .map(|t| {
            let outcome = analyze_year(t, config).map(|y| {
                y.communities
                    .into_iter()
                    .flat_map(|c| c.reports)
                    .collect::<Vec<_>>()
            });
            if let Err(e) = &outcome {
                log::error!("year {} skipped: {e}", t.year);
            }
            (t.year, outcome)
        })
        .collect()
}
