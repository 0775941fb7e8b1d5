use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mapeq::Partition;
use crate::ingest::RegionMap;
use crate::network::NodeLabel;

pub const UNMAPPED: &str = "unmapped";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityRegions {
    pub community: usize,
    pub size: usize,
    /// Most frequent mapped region; ties go to the alphabetically first.
    pub dominant_region: Option<String>,
    /// Share of members in the dominant region.
    pub purity: f64,
    pub region_counts: BTreeMap<String, usize>,
}

/// `labels[v]` names node `v` of the partition.
pub fn label_regions(
    partition: &Partition,
    labels: &[NodeLabel],
    regions: &RegionMap,
) -> Vec<CommunityRegions> {
    let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); partition.num_communities()];
    for (v, &c) in partition.assignment.iter().enumerate() {
        let region = regions.get(&labels[v].country).unwrap_or(UNMAPPED);
        *counts[c].entry(region.to_string()).or_default() += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(community, region_counts)| {
            let size: usize = region_counts.values().sum();
            let dominant = region_counts.iter().filter(|(r, _)| r.as_str() != UNMAPPED).fold(
                None,
                |best: Option<(&String, usize)>, (r, &n)| match best {
                    Some((_, b)) if b >= n => best,
                    _ => Some((r, n)),
                },
            );
            CommunityRegions {
                community,
                size,
                dominant_region: dominant.map(|(r, _)| r.clone()),
                purity: dominant.map_or(0.0, |(_, n)| n as f64 / size as f64),
                region_counts,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub community_a: usize,
    pub community_b: usize,
    pub node_overlap: usize,
}

/// Node-count intersections between the communities of two partitions,
/// matching nodes by label. Zero overlaps are omitted.
pub fn sankey_links(
    a: &Partition,
    labels_a: &[NodeLabel],
    b: &Partition,
    labels_b: &[NodeLabel],
) -> Vec<SankeyLink> {
    let index_b: BTreeMap<&NodeLabel, usize> = labels_b.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut overlap: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (v, label) in labels_a.iter().enumerate() {
        if let Some(&u) = index_b.get(label) {
            *overlap.entry((a.assignment[v], b.assignment[u])).or_default() += 1;
        }
    }
    overlap
        .into_iter()
        .map(|((community_a, community_b), node_overlap)| SankeyLink {
            community_a,
            community_b,
            node_overlap,
        })
        .collect()
}
