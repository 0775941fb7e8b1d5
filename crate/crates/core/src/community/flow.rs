use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::FlowNetwork;

pub const DEFAULT_TELEPORT_PROB: f64 = 0.15;
pub const DEFAULT_VISIT_TOL: f64 = 1e-15;
const MAX_POWER_ITERATIONS: usize = 100_000;

/// Whether teleportation steps count as movement between modules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TeleportMode {
    #[default]
    Recorded,
    Unrecorded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitDistribution {
    pub p: Vec<f64>,
    pub teleport_prob: f64,
    pub mode: TeleportMode,
    pub iterations: usize,
}

/// Stationary distribution of the walk
/// `P_ab = (1 - tau) w_ab / s_a + tau / n`, where nodes without out-links
/// jump uniformly. Power iteration stops once the L1 change drops below `tol`,
/// floored at `4 n eps`.
pub fn stationary_visits(network: &FlowNetwork, teleport_prob: f64, tol: f64) -> Result<VisitDistribution> {
    if !(teleport_prob > 0.0 && teleport_prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "teleport probability {teleport_prob} outside (0, 1)"
        )));
    }
    if network.link_count() == 0 {
        return Err(Error::InvalidArgument("network has no links".into()));
    }
    stationary_unchecked(network, teleport_prob, tol)
}

pub(crate) fn stationary_unchecked(
    network: &FlowNetwork,
    teleport_prob: f64,
    tol: f64,
) -> Result<VisitDistribution> {
    let n = network.len();
    // Rounding keeps the L1 change near n * eps even at the fixed point.
    let tol = tol.max(4.0 * f64::EPSILON * n as f64);
    let out = transition_lists(network);
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=MAX_POWER_ITERATIONS {
        let mut jump = 0.0;
        next.iter_mut().for_each(|x| *x = 0.0);
        for (a, links) in out.iter().enumerate() {
            if links.is_empty() {
                jump += p[a];
                continue;
            }
            jump += teleport_prob * p[a];
            let stay = (1.0 - teleport_prob) * p[a];
            for &(b, frac) in links {
                next[b] += stay * frac;
            }
        }
        let share = jump / n as f64;
        next.iter_mut().for_each(|x| *x += share);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = p.iter().zip(&next).map(|(x, y)| (x - y).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if residual < tol {
            return Ok(VisitDistribution {
                p,
                teleport_prob,
                mode: TeleportMode::Recorded,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_POWER_ITERATIONS,
        residual,
    })
}

/// Out-links with their share of the node's out-strength (self-loops included).
fn transition_lists(network: &FlowNetwork) -> Vec<Vec<(usize, f64)>> {
    let n = network.len();
    (0..n)
        .map(|a| {
            let s: f64 = network.weights.row(a).sum();
            if s <= 0.0 {
                return Vec::new();
            }
            (0..n)
                .filter_map(|b| {
                    let w = network.weights[(a, b)];
                    (w > 0.0).then_some((b, w / s))
                })
                .collect()
        })
        .collect()
}

/// Node and link flows of the walk, in the form the map equation needs.
#[derive(Clone, Debug)]
pub(crate) struct FlowGraph {
    pub n_total: usize,
    pub flow: Vec<f64>,
    /// Probability mass per step that leaves the node by teleportation.
    pub teleport: Vec<f64>,
    pub size: Vec<usize>,
    /// Link flows between distinct nodes.
    pub out: Vec<Vec<(usize, f64)>>,
    pub inn: Vec<Vec<(usize, f64)>>,
    pub out_total: Vec<f64>,
}

impl FlowGraph {
    pub fn new(network: &FlowNetwork, visits: &VisitDistribution) -> Self {
        let n = network.len();
        let tau = visits.teleport_prob;
        let recorded = visits.mode == TeleportMode::Recorded;
        let lists = transition_lists(network);
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        let mut teleport = vec![0.0; n];
        for (a, links) in lists.iter().enumerate() {
            let pa = visits.p[a];
            if links.is_empty() {
                if recorded {
                    teleport[a] = pa;
                }
                continue;
            }
            let (stay, jump) = if recorded { (1.0 - tau, tau) } else { (1.0, 0.0) };
            teleport[a] = jump * pa;
            for &(b, frac) in links {
                if a != b {
                    let f = stay * pa * frac;
                    out[a].push((b, f));
                    inn[b].push((a, f));
                }
            }
        }
        let out_total = out.iter().map(|l| l.iter().map(|x| x.1).sum()).collect();
        FlowGraph {
            n_total: n,
            flow: visits.p.clone(),
            teleport,
            size: vec![1; n],
            out,
            inn,
            out_total,
        }
    }

    pub fn len(&self) -> usize {
        self.flow.len()
    }

    /// Merges nodes by `assignment` (ids in `0..m`) into a coarser graph.
    pub fn aggregate(&self, assignment: &[usize], m: usize) -> FlowGraph {
        let mut flow = vec![0.0; m];
        let mut teleport = vec![0.0; m];
        let mut size = vec![0; m];
        for v in 0..self.len() {
            let c = assignment[v];
            flow[c] += self.flow[v];
            teleport[c] += self.teleport[v];
            size[c] += self.size[v];
        }
        let mut dense = vec![0.0; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
        for v in 0..self.len() {
            members[assignment[v]].push(v);
        }
        let mut out = vec![Vec::new(); m];
        for (c, vs) in members.iter().enumerate() {
            for &v in vs {
                for &(u, f) in &self.out[v] {
                    let d = assignment[u];
                    if d == c {
                        continue;
                    }
                    if dense[d] == 0.0 {
                        touched.push(d);
                    }
                    dense[d] += f;
                }
            }
            touched.sort_unstable();
            for &d in &touched {
                out[c].push((d, dense[d]));
                dense[d] = 0.0;
            }
            touched.clear();
        }
        let mut inn = vec![Vec::new(); m];
        for (c, links) in out.iter().enumerate() {
            for &(d, f) in links {
                inn[d].push((c, f));
            }
        }
        let out_total = out.iter().map(|l| l.iter().map(|x| x.1).sum()).collect();
        FlowGraph {
            n_total: self.n_total,
            flow,
            teleport,
            size,
            out,
            inn,
            out_total,
        }
    }

    /// The subgraph on `members` as a network of its own: internal links
    /// only, flows rescaled to sum to one.
    pub fn restrict(&self, members: &[usize]) -> FlowGraph {
        let mut local = vec![usize::MAX; self.len()];
        for (a, &v) in members.iter().enumerate() {
            local[v] = a;
        }
        let total: f64 = members.iter().map(|&v| self.flow[v]).sum();
        let scale = if total > 0.0 { 1.0 / total } else { 1.0 };
        let mut out = vec![Vec::new(); members.len()];
        let mut inn = vec![Vec::new(); members.len()];
        for (a, &v) in members.iter().enumerate() {
            for &(u, f) in &self.out[v] {
                let b = local[u];
                if b != usize::MAX {
                    out[a].push((b, f * scale));
                    inn[b].push((a, f * scale));
                }
            }
        }
        let out_total = out.iter().map(|l| l.iter().map(|x| x.1).sum()).collect();
        FlowGraph {
            n_total: members.iter().map(|&v| self.size[v]).sum(),
            flow: members.iter().map(|&v| self.flow[v] * scale).collect(),
            teleport: members.iter().map(|&v| self.teleport[v] * scale).collect(),
            size: members.iter().map(|&v| self.size[v]).collect(),
            out,
            inn,
            out_total,
        }
    }
}
