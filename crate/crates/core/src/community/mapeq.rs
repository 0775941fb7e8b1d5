//! Two-level map equation.
//!
//! For a partition into modules with exit rates `q_i` and node visit rates
//! `p_a`, the per-step description length is
//!
//! ```text
//! L = q H(Q) + sum_i p_i H(P^i),   q = sum_i q_i,   p_i = q_i + sum_{a in i} p_a
//! ```
//!
//! which expands to `plogp(q) - 2 sum plogp(q_i) - sum plogp(p_a) + sum plogp(p_i)`.
//! With recorded teleportation a module's exit rate is
//! `q_i = sum_{a in i} p_a [(1 - tau) out-fraction leaving i + tau (n - n_i) / n]`,
//! where dangling nodes leave only by teleportation.

use serde::{Deserialize, Serialize};

use super::flow::{FlowGraph, VisitDistribution};
use crate::error::{Error, Result};
use crate::network::FlowNetwork;

#[inline]
pub(crate) fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleStats {
    pub size: usize,
    /// Sum of member visit rates.
    pub flow: f64,
    /// Exit probability `q_i`.
    pub exit: f64,
    /// Within-module rate including exit, `flow + exit`.
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Community id per node, numbered by first appearance in node order.
    pub assignment: Vec<usize>,
    pub codelength: f64,
    pub modules: Vec<ModuleStats>,
}

impl Partition {
    pub fn num_communities(&self) -> usize {
        self.modules.len()
    }

    pub fn index_exit(&self) -> f64 {
        self.modules.iter().map(|m| m.exit).sum()
    }

    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == community)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.modules.iter().map(|m| m.size).collect()
    }
}

/// Renumbers arbitrary ids to `0..m` by first appearance.
pub fn canonical_labels(assignment: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let labels = assignment
        .iter()
        .map(|a| {
            let next = map.len();
            *map.entry(*a).or_insert(next)
        })
        .collect();
    (labels, map.len())
}

pub(crate) fn node_entropy_term(graph: &FlowGraph) -> f64 {
    graph.flow.iter().map(|p| plogp(*p)).sum()
}

pub(crate) fn module_stats(graph: &FlowGraph, assignment: &[usize], m: usize) -> Vec<ModuleStats> {
    let mut size = vec![0usize; m];
    let mut flow = vec![0.0; m];
    let mut teleport = vec![0.0; m];
    let mut exit_links = vec![0.0; m];
    for v in 0..graph.len() {
        let c = assignment[v];
        size[c] += graph.size[v];
        flow[c] += graph.flow[v];
        teleport[c] += graph.teleport[v];
        for &(u, f) in &graph.out[v] {
            if assignment[u] != c {
                exit_links[c] += f;
            }
        }
    }
    let n = graph.n_total as f64;
    (0..m)
        .map(|c| {
            let exit = if size[c] == 0 {
                0.0
            } else {
                exit_links[c] + teleport[c] * (n - size[c] as f64) / n
            };
            ModuleStats {
                size: size[c],
                flow: flow[c],
                exit,
                total: flow[c] + exit,
            }
        })
        .collect()
}

pub(crate) fn codelength_of(modules: &[ModuleStats], node_entropy: f64) -> f64 {
    let exit: f64 = modules.iter().map(|m| m.exit).sum();
    let exit_terms: f64 = modules.iter().map(|m| plogp(m.exit)).sum();
    let total_terms: f64 = modules.iter().map(|m| plogp(m.total)).sum();
    plogp(exit) - 2.0 * exit_terms - node_entropy + total_terms
}

pub(crate) fn partition_on(graph: &FlowGraph, assignment: &[usize]) -> Partition {
    let (assignment, m) = canonical_labels(assignment);
    let modules = module_stats(graph, &assignment, m);
    let codelength = codelength_of(&modules, node_entropy_term(graph));
    Partition {
        assignment,
        codelength,
        modules,
    }
}

/// Map-equation codelength in bits of `assignment` (any integer ids).
pub fn codelength(network: &FlowNetwork, visits: &VisitDistribution, assignment: &[usize]) -> Result<f64> {
    Ok(evaluate_partition(network, visits, assignment)?.codelength)
}

/// Full partition record, including per-module exit and total rates.
pub fn evaluate_partition(
    network: &FlowNetwork,
    visits: &VisitDistribution,
    assignment: &[usize],
) -> Result<Partition> {
    if assignment.len() != network.len() || visits.p.len() != network.len() {
        return Err(Error::Dimension(format!(
            "{} nodes, {} visit rates, {} assignments",
            network.len(),
            visits.p.len(),
            assignment.len()
        )));
    }
    let graph = FlowGraph::new(network, visits);
    Ok(partition_on(&graph, assignment))
}
