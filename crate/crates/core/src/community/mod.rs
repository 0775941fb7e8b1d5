//! Flow communities by minimising the two-level map equation.

mod flow;
mod mapeq;
mod optimize;
mod regions;
mod scan;

pub use flow::{
    stationary_visits, TeleportMode, VisitDistribution, DEFAULT_TELEPORT_PROB, DEFAULT_VISIT_TOL,
};
pub use mapeq::{canonical_labels, codelength, evaluate_partition, ModuleStats, Partition};
pub use optimize::{detect_communities, DetectOptions};
pub use regions::{label_regions, sankey_links, CommunityRegions, SankeyLink, UNMAPPED};
pub use scan::{partition_at, threshold_scan, ScanEntry, ScanOptions, ScanResult, ThresholdPartition};
