//! Directed weighted flow networks over (country, sector) nodes.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node label. Aggregated networks leave one of the two fields empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeLabel {
    pub country: String,
    pub sector: String,
}

impl NodeLabel {
    pub fn new(country: impl Into<String>, sector: impl Into<String>) -> Self {
        NodeLabel {
            country: country.into(),
            sector: sector.into(),
        }
    }

    pub fn country(country: impl Into<String>) -> Self {
        Self::new(country, "")
    }

    pub fn sector(sector: impl Into<String>) -> Self {
        Self::new("", sector)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.country.is_empty(), self.sector.is_empty()) {
            (false, false) => write!(f, "{}_{}", self.country, self.sector),
            (true, _) => f.write_str(&self.sector),
            (false, true) => f.write_str(&self.country),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    Gvan,
    Ivan,
    Subnetwork(String),
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkKind::Gvan => f.write_str("GVAN"),
            NetworkKind::Ivan => f.write_str("IVAN"),
            NetworkKind::Subnetwork(tag) => write!(f, "subnetwork:{tag}"),
        }
    }
}

/// Dense directed network; `weights[(i, j)]` is the flow i -> j and zero
/// means no link.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    pub nodes: Vec<NodeLabel>,
    pub weights: DMatrix<f64>,
    pub kind: NetworkKind,
}

impl FlowNetwork {
    pub fn new(nodes: Vec<NodeLabel>, weights: DMatrix<f64>, kind: NetworkKind) -> Result<Self> {
        if weights.nrows() != nodes.len() || weights.ncols() != nodes.len() {
            return Err(Error::Dimension(format!(
                "{} labels for a {}x{} weight matrix",
                nodes.len(),
                weights.nrows(),
                weights.ncols()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "flow weights must be finite and non-negative, found {w}"
            )));
        }
        Ok(FlowNetwork { nodes, weights, kind })
    }

    /// Builds a network from an edge list; repeated edges accumulate.
    pub fn from_edges(
        nodes: Vec<NodeLabel>,
        edges: &[(usize, usize, f64)],
        kind: NetworkKind,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut weights = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Dimension(format!("edge ({i}, {j}) outside {n} nodes")));
            }
            weights[(i, j)] += w;
        }
        Self::new(nodes, weights, kind)
    }

    /// Nodes labelled `n0`, `n1`, ... with an empty country; handy for synthetic graphs.
    pub fn anonymous(weights: DMatrix<f64>) -> Result<Self> {
        let nodes = (0..weights.nrows())
            .map(|i| NodeLabel::sector(format!("n{i}")))
            .collect();
        Self::new(nodes, weights, NetworkKind::Subnetwork("synthetic".into()))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Number of directed links with positive weight, self-loops included.
    pub fn link_count(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn out_strengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weights.row(i).sum()).collect()
    }

    pub fn in_strengths(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.weights.column(j).sum()).collect()
    }

    /// Positive links as `(source, target, weight)` in row-major order.
    pub fn links(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Induced subnetwork on `indices`, in the given order.
    pub fn subnetwork(&self, indices: &[usize], kind: NetworkKind) -> FlowNetwork {
        let nodes = indices.iter().map(|&i| self.nodes[i].clone()).collect();
        let weights = DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.weights[(indices[a], indices[b])]
        });
        FlowNetwork { nodes, weights, kind }
    }

    /// Indices of nodes with at least one incident positive link (self-loops ignored).
    pub fn connected_nodes(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&i| (0..n).any(|j| j != i && (self.weights[(i, j)] > 0.0 || self.weights[(j, i)] > 0.0)))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> FlowNetwork {
        FlowNetwork {
            nodes: self.nodes.clone(),
            weights: &self.weights * factor,
            kind: self.kind.clone(),
        }
    }
}
