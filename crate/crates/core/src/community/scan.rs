//! Threshold scan: keep the `k` heaviest links, drop nodes left without
//! links, detect communities, and count the large ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mapeq::Partition;
use super::optimize::{detect_communities, DetectOptions};
use crate::error::{Error, Result};
use crate::network::{FlowNetwork, NetworkKind};
use crate::van::threshold_top_k;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    /// Communities need strictly more nodes than this to count as large.
    pub size_floor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub k: usize,
    pub active_nodes: usize,
    pub num_communities: usize,
    pub num_large_communities: usize,
    pub codelength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub entries: Vec<ScanEntry>,
    /// Largest `k` with at least two large communities.
    pub selected_k: Option<usize>,
}

/// Partition of the nodes that keep at least one link after thresholding.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdPartition {
    pub k: usize,
    /// Indices into the unthresholded network, one per partitioned node.
    pub nodes: Vec<usize>,
    pub partition: Partition,
}

impl ThresholdPartition {
    /// Communities larger than `size_floor`, each as indices into the
    /// original network, ordered by community id.
    pub fn large_communities(&self, size_floor: usize) -> Vec<(usize, Vec<usize>)> {
        (0..self.partition.num_communities())
            .filter(|&c| self.partition.modules[c].size > size_floor)
            .map(|c| {
                let members = self
                    .partition
                    .members(c)
                    .into_iter()
                    .map(|i| self.nodes[i])
                    .collect();
                (c, members)
            })
            .collect()
    }
}

pub fn partition_at(network: &FlowNetwork, k: usize, detect: &DetectOptions) -> Result<ThresholdPartition> {
    let cut = threshold_top_k(network, k)?;
    let nodes = cut.connected_nodes();
    let sub = cut.subnetwork(&nodes, NetworkKind::Subnetwork(format!("top-{k}")));
    let partition = detect_communities(&sub, detect)?;
    Ok(ThresholdPartition { k, nodes, partition })
}

pub fn threshold_scan(
    network: &FlowNetwork,
    scan: &ScanOptions,
    detect: &DetectOptions,
) -> Result<ScanResult> {
    if scan.k_min == 0 || scan.k_min > scan.k_max || scan.k_step == 0 {
        return Err(Error::InvalidArgument(format!(
            "scan range k_min={} k_max={} k_step={} is empty or invalid",
            scan.k_min, scan.k_max, scan.k_step
        )));
    }
    let ks: Vec<usize> = (scan.k_min..=scan.k_max).step_by(scan.k_step).collect();
    let entries = ks
        .par_iter()
        .map(|&k| {
            let tp = partition_at(network, k, detect)?;
            Ok(ScanEntry {
                k,
                active_nodes: tp.nodes.len(),
                num_communities: tp.partition.num_communities(),
                num_large_communities: tp.large_communities(scan.size_floor).len(),
                codelength: tp.partition.codelength,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let selected_k = entries
        .iter()
        .filter(|e| e.num_large_communities >= 2)
        .map(|e| e.k)
        .max();
    Ok(ScanResult { entries, selected_k })
}
