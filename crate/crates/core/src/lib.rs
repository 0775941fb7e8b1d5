//! Value-added network analysis of multi-country input-output tables.
//!
//! The pipeline runs in stages:
//!
//! 1. [`ingest`] reads an input-output table and checks its accounting identities.
//! 2. [`van`] builds the Leontief system and the global (GVAN) and
//!    international (IVAN) value-added networks.
//! 3. [`community`] finds flow communities by minimising the two-level map
//!    equation, optionally after keeping only the strongest links.
//! 4. [`hhd`] splits community flows into potential and circular parts.
//! 5. [`integration`] turns circular flow into the economic integration index.
//!
//! [`metrics`] reports structural statistics of any network and [`export`]
//! writes edge lists and graph files.

pub mod community;
pub mod error;
pub mod export;
pub mod hhd;
pub mod ingest;
pub mod integration;
pub mod metrics;
pub mod network;
pub mod toy;
pub mod van;

pub use error::{Error, Result};
pub use ingest::{IoTable, RegionMap};
pub use network::{FlowNetwork, NetworkKind, NodeLabel};
