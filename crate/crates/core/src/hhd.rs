//! Helmholtz-Hodge decomposition of directed flow networks.
//!
//! The net flow `F'_ij = F_ij - F_ji` on every connected pair (`w_ij = 1`
//! whenever `F_ij + F_ji > 0`) splits into a potential part
//! `w_ij (phi_i - phi_j)` and a divergence-free circular part. The
//! potentials solve the graph Laplacian system `L phi = div F'` with
//! `sum phi = 0` on every connected component.
//!
//! Reciprocal flow `min(F_ij, F_ji)` cancels in `F'` and is reported
//! separately by [`bilateral_circulation`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::network::{FlowNetwork, NetworkKind, NodeLabel};

/// Components up to this size use a dense Cholesky solve.
pub const DIRECT_SOLVE_LIMIT: usize = 2408;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianSolver {
    #[default]
    Auto,
    Cholesky,
    ConjugateGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HodgeDecomposition {
    pub nodes: Vec<NodeLabel>,
    pub phi: Vec<f64>,
    /// Symmetric pair weights; zero where the pair has no flow.
    pub weights: DMatrix<f64>,
    /// `F - F^T`.
    pub net_flow: DMatrix<f64>,
    /// Antisymmetric circular component.
    pub circular: DMatrix<f64>,
    /// `min(F_ij, F_ji)`, symmetric.
    pub bilateral: DMatrix<f64>,
    /// Max over pairs of `|F' - F^(c) - F^(p)|`.
    pub residual: f64,
}

impl HodgeDecomposition {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn potential_flow(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)] * (self.phi[i] - self.phi[j])
    }

    /// Net outflow per node.
    pub fn divergence(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.net_flow.row(i).sum()).collect()
    }

    /// `sum_j |F^(c)_ij|`: each pair incident to a node counted once.
    pub fn circular_strength(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.circular.row(i).iter().map(|c| c.abs()).sum())
            .collect()
    }

    /// Circular flows on pairs with `F^(c)_ij > 0`, row-major.
    pub fn positive_circular_links(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = self.circular[(i, j)];
                if c > 0.0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    pub fn table(&self) -> PotentialTable {
        PotentialTable {
            labels: self.nodes.iter().map(ToString::to_string).collect(),
            phi: self.phi.clone(),
            circular_strength: self.circular_strength(),
        }
    }
}

/// Min of the two directions of every pair.
pub fn bilateral_circulation(network: &FlowNetwork) -> DMatrix<f64> {
    let n = network.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            network.weights[(i, j)].min(network.weights[(j, i)])
        }
    })
}

pub fn decompose(network: &FlowNetwork) -> HodgeDecomposition {
    decompose_with(network, LaplacianSolver::Auto)
}

pub fn decompose_with(network: &FlowNetwork, solver: LaplacianSolver) -> HodgeDecomposition {
    let n = network.len();
    let f = &network.weights;
    let weights = DMatrix::from_fn(n, n, |i, j| {
        if i != j && f[(i, j)] + f[(j, i)] > 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let net_flow = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f[(i, j)] - f[(j, i)] });
    let div: Vec<f64> = (0..n).map(|i| net_flow.row(i).sum()).collect();

    let mut phi = vec![0.0; n];
    let mut circular = DMatrix::zeros(n, n);
    for component in components(&weights) {
        let edges = count_pairs(&weights, &component);
        if component.len() > 1 {
            let local = solve_component(&weights, &div, &component, solver);
            for (&v, p) in component.iter().zip(local) {
                phi[v] = p;
            }
        }
        // A spanning tree has an empty cycle space: all net flow is potential.
        if edges + 1 == component.len() {
            continue;
        }
        for (a, &i) in component.iter().enumerate() {
            for &j in &component[a + 1..] {
                let w = weights[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let c = net_flow[(i, j)] - w * (phi[i] - phi[j]);
                circular[(i, j)] = c;
                circular[(j, i)] = -c;
            }
        }
    }

    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let r = net_flow[(i, j)] - circular[(i, j)] - weights[(i, j)] * (phi[i] - phi[j]);
            residual = residual.max(r.abs());
        }
    }

    HodgeDecomposition {
        nodes: network.nodes.clone(),
        phi,
        weights,
        net_flow,
        circular,
        bilateral: bilateral_circulation(network),
        residual,
    }
}

/// Connected components of the pair support, each sorted ascending.
fn components(weights: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = weights.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for u in 0..n {
                if !seen[u] && weights[(v, u)] > 0.0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn count_pairs(weights: &DMatrix<f64>, component: &[usize]) -> usize {
    component
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            component[a + 1..]
                .iter()
                .filter(|&&j| weights[(i, j)] > 0.0)
                .count()
        })
        .sum()
}

fn solve_component(
    weights: &DMatrix<f64>,
    div: &[f64],
    component: &[usize],
    solver: LaplacianSolver,
) -> Vec<f64> {
    let c = component.len();
    let lap = DMatrix::from_fn(c, c, |a, b| {
        if a == b {
            component.iter().map(|&j| weights[(component[a], j)]).sum()
        } else {
            -weights[(component[a], component[b])]
        }
    });
    let rhs = DVector::from_iterator(c, component.iter().map(|&i| div[i]));
    let use_direct = match solver {
        LaplacianSolver::Auto => c <= DIRECT_SOLVE_LIMIT,
        LaplacianSolver::Cholesky => true,
        LaplacianSolver::ConjugateGradient => false,
    };
    let mut x = if use_direct {
        // Ground the last node; the reduced Laplacian of a connected graph is SPD.
        let reduced = lap.view((0, 0), (c - 1, c - 1)).into_owned();
        let b = rhs.rows(0, c - 1).into_owned();
        let chol = reduced
            .cholesky()
            .expect("reduced Laplacian of a connected component is positive definite");
        let y = chol.solve(&b);
        let mut x: Vec<f64> = y.iter().copied().collect();
        x.push(0.0);
        x
    } else {
        conjugate_gradient(&lap, &rhs)
    };
    let mean = x.iter().sum::<f64>() / c as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    x
}

/// CG on the singular but consistent component Laplacian, started from zero
/// so iterates stay orthogonal to the constant null vector.
fn conjugate_gradient(lap: &DMatrix<f64>, rhs: &DVector<f64>) -> Vec<f64> {
    let c = rhs.len();
    let mut x = DVector::zeros(c);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let target = (1e-30 * rr).max(f64::MIN_POSITIVE);
    for _ in 0..(10 * c).max(100) {
        if rr <= target {
            break;
        }
        let lp = lap * &p;
        let alpha = rr / p.dot(&lp);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &lp, 1.0);
        let rr_new = r.dot(&r);
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    x.iter().copied().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    Country,
    Sector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregated {
    pub network: FlowNetwork,
    /// Total weight of within-group flows that were dropped.
    pub dropped_self_flow: f64,
    /// Group index of every original node.
    pub membership: Vec<usize>,
}

fn group_key(label: &NodeLabel, by: GroupBy) -> NodeLabel {
    match by {
        GroupBy::Country => NodeLabel::country(label.country.clone()),
        GroupBy::Sector => NodeLabel::sector(label.sector.clone()),
    }
}

fn group_nodes(nodes: &[NodeLabel], by: GroupBy) -> (Vec<NodeLabel>, Vec<usize>) {
    let mut groups: Vec<NodeLabel> = Vec::new();
    let mut index: BTreeMap<NodeLabel, usize> = BTreeMap::new();
    let membership = nodes
        .iter()
        .map(|l| {
            let key = group_key(l, by);
            *index.entry(key.clone()).or_insert_with(|| {
                groups.push(key);
                groups.len() - 1
            })
        })
        .collect();
    (groups, membership)
}

/// Sums flows between groups; within-group flows are dropped. Groups are
/// ordered by first appearance.
pub fn aggregate(network: &FlowNetwork, by: GroupBy) -> Aggregated {
    let (groups, membership) = group_nodes(&network.nodes, by);
    let g = groups.len();
    let mut weights = DMatrix::zeros(g, g);
    let mut dropped = 0.0;
    for i in 0..network.len() {
        for j in 0..network.len() {
            let w = network.weights[(i, j)];
            if w == 0.0 {
                continue;
            }
            let (a, b) = (membership[i], membership[j]);
            if a == b {
                dropped += w;
            } else {
                weights[(a, b)] += w;
            }
        }
    }
    let tag = match by {
        GroupBy::Country => "by-country",
        GroupBy::Sector => "by-sector",
    };
    Aggregated {
        network: FlowNetwork {
            nodes: groups,
            weights,
            kind: NetworkKind::Subnetwork(tag.into()),
        },
        dropped_self_flow: dropped,
        membership,
    }
}

/// How group-level potentials are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankingMode {
    /// Aggregate flows to groups, then decompose the group network.
    #[default]
    AggregateThenDecompose,
    /// Decompose the node network, then average potentials and sum circular
    /// flows per group.
    DecomposeThenAggregate,
}

/// Per-node (or per-group) potentials and circular strengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub labels: Vec<String>,
    pub phi: Vec<f64>,
    pub circular_strength: Vec<f64>,
}

pub fn group_table(
    node_decomp: &HodgeDecomposition,
    network: &FlowNetwork,
    by: GroupBy,
    mode: RankingMode,
) -> PotentialTable {
    match mode {
        RankingMode::AggregateThenDecompose => decompose(&aggregate(network, by).network).table(),
        RankingMode::DecomposeThenAggregate => {
            let (groups, membership) = group_nodes(&node_decomp.nodes, by);
            let g = groups.len();
            let mut phi = vec![0.0; g];
            let mut count = vec![0usize; g];
            let mut circ = DMatrix::zeros(g, g);
            for i in 0..node_decomp.len() {
                phi[membership[i]] += node_decomp.phi[i];
                count[membership[i]] += 1;
                for j in 0..node_decomp.len() {
                    if membership[i] != membership[j] {
                        circ[(membership[i], membership[j])] += node_decomp.circular[(i, j)];
                    }
                }
            }
            PotentialTable {
                labels: groups.iter().map(ToString::to_string).collect(),
                phi: phi.iter().zip(&count).map(|(p, c)| p / *c as f64).collect(),
                circular_strength: (0..g)
                    .map(|a| circ.row(a).iter().map(|c: &f64| c.abs()).sum::<f64>())
                    .collect(),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialRanking {
    pub highest: Vec<Ranked>,
    pub lowest: Vec<Ranked>,
}

fn ranked(table: &PotentialTable, values: &[f64], descending: bool, top: usize) -> Vec<Ranked> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if descending { ord.reverse() } else { ord };
        ord.then_with(|| table.labels[a].cmp(&table.labels[b]))
    });
    idx.into_iter()
        .take(top)
        .map(|i| Ranked {
            label: table.labels[i].clone(),
            value: values[i],
        })
        .collect()
}

impl PotentialTable {
    pub fn rank_potentials(&self, top: usize) -> PotentialRanking {
        PotentialRanking {
            highest: ranked(self, &self.phi, true, top),
            lowest: ranked(self, &self.phi, false, top),
        }
    }

    pub fn rank_circulation(&self, top: usize) -> Vec<Ranked> {
        ranked(self, &self.circular_strength, true, top)
    }
}

pub fn rank_potentials(decomp: &HodgeDecomposition, top: usize) -> PotentialRanking {
    decomp.table().rank_potentials(top)
}

pub fn rank_circulation(decomp: &HodgeDecomposition, top: usize) -> Vec<Ranked> {
    decomp.table().rank_circulation(top)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VPoint {
    pub label: String,
    pub phi: f64,
    pub circular_strength: f64,
}

/// Scatter data of potential against circular strength.
pub fn v_curve_data(decomp: &HodgeDecomposition) -> Vec<VPoint> {
    let strength = decomp.circular_strength();
    decomp
        .nodes
        .iter()
        .zip(&decomp.phi)
        .zip(strength)
        .map(|((l, &phi), circular_strength)| VPoint {
            label: l.to_string(),
            phi,
            circular_strength,
        })
        .collect()
}
