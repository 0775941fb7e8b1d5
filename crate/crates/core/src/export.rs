//! Text serialisations of networks and decomposition results: edge-list and
//! table CSVs, GEXF and Graphviz DOT. Writers return strings so callers can
//! prepend metadata and write atomically.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hhd::{HodgeDecomposition, PotentialTable};
use crate::network::{FlowNetwork, NodeLabel};

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Csv {
        path: "<memory>".into(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `source_country,source_sector,target_country,target_sector,weight`, one
/// row per positive link in row-major order.
pub fn edge_list_csv(network: &FlowNetwork) -> Result<String> {
    csv_string(
        &[
            "source_country",
            "source_sector",
            "target_country",
            "target_sector",
            "weight",
        ],
        network.links().into_iter().map(|(i, j, w)| {
            let (s, t) = (&network.nodes[i], &network.nodes[j]);
            vec![
                s.country.clone(),
                s.sector.clone(),
                t.country.clone(),
                t.sector.clone(),
                w.to_string(),
            ]
        }),
    )
}

/// `group_label,phi,circular_strength`.
pub fn potentials_csv(table: &PotentialTable) -> Result<String> {
    csv_string(
        &["group_label", "phi", "circular_strength"],
        (0..table.labels.len()).map(|i| {
            vec![
                table.labels[i].clone(),
                table.phi[i].to_string(),
                table.circular_strength[i].to_string(),
            ]
        }),
    )
}

/// `source,target,circular_flow,bilateral_circulation` for each link with
/// positive circular flow.
pub fn circular_edges_csv(decomp: &HodgeDecomposition) -> Result<String> {
    csv_string(
        &["source", "target", "circular_flow", "bilateral_circulation"],
        decomp.positive_circular_links().into_iter().map(|(i, j, c)| {
            vec![
                decomp.nodes[i].to_string(),
                decomp.nodes[j].to_string(),
                c.to_string(),
                decomp.bilateral[(i, j)].to_string(),
            ]
        }),
    )
}

/// Subgraph of the `k` largest positive circular links (ties by node pair).
#[derive(Clone, Debug, PartialEq)]
pub struct CircularSubgraph {
    pub nodes: Vec<NodeLabel>,
    /// `(source, target, circular_flow)` in descending flow order, indices
    /// into `nodes`.
    pub links: Vec<(usize, usize, f64)>,
    /// `sqrt(degree)` within the subgraph.
    pub node_size: Vec<f64>,
}

pub fn top_circular_links(decomp: &HodgeDecomposition, k: usize) -> CircularSubgraph {
    let mut links = decomp.positive_circular_links();
    links.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    links.truncate(k);

    let mut keep: Vec<usize> = links.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    keep.sort_unstable();
    keep.dedup();
    let local = |g: usize| keep.binary_search(&g).expect("endpoint kept");
    let mut degree = vec![0usize; keep.len()];
    let links: Vec<_> = links
        .into_iter()
        .map(|(i, j, c)| {
            let (a, b) = (local(i), local(j));
            degree[a] += 1;
            degree[b] += 1;
            (a, b, c)
        })
        .collect();
    CircularSubgraph {
        nodes: keep.iter().map(|&g| decomp.nodes[g].clone()).collect(),
        links,
        node_size: degree.into_iter().map(|d| (d as f64).sqrt()).collect(),
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn gexf_document(nodes: &[NodeLabel], sizes: Option<&[f64]>, links: &[(usize, usize, f64)]) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<gexf xmlns=\"http://gexf.net/1.3\" xmlns:viz=\"http://gexf.net/1.3/viz\" version=\"1.3\">\n",
    );
    s.push_str("  <graph defaultedgetype=\"directed\" mode=\"static\">\n");
    s.push_str("    <attributes class=\"node\">\n");
    s.push_str("      <attribute id=\"country\" title=\"country\" type=\"string\"/>\n");
    s.push_str("      <attribute id=\"sector\" title=\"sector\" type=\"string\"/>\n");
    s.push_str("    </attributes>\n");
    s.push_str("    <nodes>\n");
    for (i, n) in nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "      <node id=\"{i}\" label=\"{}\">",
            xml_escape(&n.to_string())
        );
        let _ = writeln!(
            s,
            "        <attvalues><attvalue for=\"country\" value=\"{}\"/><attvalue for=\"sector\" value=\"{}\"/></attvalues>",
            xml_escape(&n.country),
            xml_escape(&n.sector)
        );
        if let Some(sz) = sizes {
            let _ = writeln!(s, "        <viz:size value=\"{}\"/>", sz[i]);
        }
        s.push_str("      </node>\n");
    }
    s.push_str("    </nodes>\n    <edges>\n");
    for (e, &(i, j, w)) in links.iter().enumerate() {
        let _ = writeln!(
            s,
            "      <edge id=\"{e}\" source=\"{i}\" target=\"{j}\" weight=\"{w}\"/>"
        );
    }
    s.push_str("    </edges>\n  </graph>\n</gexf>\n");
    s
}

pub fn network_gexf(network: &FlowNetwork) -> String {
    gexf_document(&network.nodes, None, &network.links())
}

pub fn circular_gexf(sub: &CircularSubgraph) -> String {
    gexf_document(&sub.nodes, Some(&sub.node_size), &sub.links)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn circular_dot(sub: &CircularSubgraph) -> String {
    let mut s = String::from("digraph circular {\n");
    for (i, n) in sub.nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "  n{i} [label={}, width={}];",
            dot_quote(&n.to_string()),
            sub.node_size[i]
        );
    }
    for &(i, j, c) in &sub.links {
        let _ = writeln!(s, "  n{i} -> n{j} [weight={c}, penwidth={c}];");
    }
    s.push_str("}\n");
    s
}
