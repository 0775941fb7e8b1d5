//! Structural statistics of flow networks.
//!
//! Density, reciprocity, path lengths, betweenness and degrees treat the
//! network as unweighted and directed (a link is any positive off-diagonal
//! weight). Clustering and the headline assortativity use the undirected
//! projection. Degree and betweenness averages are taken over nodes with a
//! nonzero value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::FlowNetwork;

const SOURCE_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedAssortativity {
    pub out_in: Option<f64>,
    pub in_out: Option<f64>,
    pub out_out: Option<f64>,
    pub in_in: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub nodes: usize,
    pub links: usize,
    pub density: f64,
    pub reciprocity: f64,
    pub clustering_coefficient: f64,
    /// Longest finite shortest path; `None` when no pair is connected.
    pub diameter: Option<usize>,
    pub average_path_length: Option<f64>,
    /// False when some ordered pair is unreachable; path statistics then
    /// cover reachable pairs only.
    pub strongly_connected: bool,
    pub average_betweenness: f64,
    /// Undirected total-degree assortativity; `None` if all degrees agree.
    pub assortativity: Option<f64>,
    pub assortativity_directed: DirectedAssortativity,
    pub average_in_degree: f64,
    pub average_out_degree: f64,
    pub average_in_strength: f64,
    pub average_out_strength: f64,
    pub averages_over_nonzero: bool,
}

struct Adjacency {
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl Adjacency {
    fn new(network: &FlowNetwork) -> Self {
        let n = network.len();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && network.weights[(i, j)] > 0.0 {
                    out[i].push(j);
                    inn[j].push(i);
                }
            }
        }
        Adjacency { out, inn }
    }

    fn links(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

fn mean_nonzero(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .filter(|v| *v != 0.0)
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

struct PathTotals {
    betweenness: Vec<f64>,
    distance_sum: f64,
    reachable_pairs: usize,
    diameter: usize,
}

/// Brandes accumulation from one source.
fn single_source(adj: &Adjacency, s: usize, totals: &mut PathTotals, scratch: &mut Scratch) {
    let Scratch {
        dist,
        sigma,
        delta,
        order,
        queue,
    } = scratch;
    dist.iter_mut().for_each(|d| *d = usize::MAX);
    sigma.iter_mut().for_each(|x| *x = 0.0);
    delta.iter_mut().for_each(|x| *x = 0.0);
    order.clear();
    queue.clear();

    dist[s] = 0;
    sigma[s] = 1.0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj.out[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    for &v in order.iter().rev() {
        for &w in &adj.out[v] {
            if dist[w] == dist[v] + 1 {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
        if v != s {
            totals.betweenness[v] += delta[v];
            totals.distance_sum += dist[v] as f64;
            totals.reachable_pairs += 1;
            totals.diameter = totals.diameter.max(dist[v]);
        }
    }
}

struct Scratch {
    dist: Vec<usize>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: std::collections::VecDeque<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            dist: vec![0; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: std::collections::VecDeque::with_capacity(n),
        }
    }
}

fn path_totals(adj: &Adjacency) -> PathTotals {
    let n = adj.out.len();
    let empty = || PathTotals {
        betweenness: vec![0.0; n],
        distance_sum: 0.0,
        reachable_pairs: 0,
        diameter: 0,
    };
    // Fixed chunks, summed in order: the result does not depend on the pool size.
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<PathTotals> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut totals = empty();
            let mut scratch = Scratch::new(n);
            for &s in chunk {
                single_source(adj, s, &mut totals, &mut scratch);
            }
            totals
        })
        .collect();
    let mut all = empty();
    for p in partials {
        for (a, b) in all.betweenness.iter_mut().zip(&p.betweenness) {
            *a += b;
        }
        all.distance_sum += p.distance_sum;
        all.reachable_pairs += p.reachable_pairs;
        all.diameter = all.diameter.max(p.diameter);
    }
    all
}

/// Average local clustering on the undirected projection; nodes with fewer
/// than two neighbours contribute zero.
fn clustering(adj: &Adjacency) -> (f64, Vec<usize>) {
    let n = adj.out.len();
    let words = n.div_ceil(64);
    let mut bits = vec![vec![0u64; words]; n];
    for i in 0..n {
        for &j in adj.out[i].iter().chain(&adj.inn[i]) {
            bits[i][j / 64] |= 1 << (j % 64);
            bits[j][i / 64] |= 1 << (i % 64);
        }
    }
    let degree: Vec<usize> = bits
        .iter()
        .map(|b| b.iter().map(|w| w.count_ones() as usize).sum())
        .collect();
    let coefficients: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let k = degree[i];
            if k < 2 {
                return 0.0;
            }
            let mut twice_links = 0usize;
            for (wi, &word) in bits[i].iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let j = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    twice_links += bits[i]
                        .iter()
                        .zip(&bits[j])
                        .map(|(a, b)| (a & b).count_ones() as usize)
                        .sum::<usize>();
                }
            }
            twice_links as f64 / (k * (k - 1)) as f64
        })
        .collect();
    (coefficients.iter().sum::<f64>() / n as f64, degree)
}

fn undirected_assortativity(adj: &Adjacency, degree: &[usize]) -> Option<f64> {
    let n = adj.out.len();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..n {
        let mut nbrs: Vec<usize> = adj.out[i]
            .iter()
            .chain(&adj.inn[i])
            .copied()
            .filter(|&j| j > i)
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        for j in nbrs {
            let (a, b) = (degree[i] as f64, degree[j] as f64);
            xs.extend([a, b]);
            ys.extend([b, a]);
        }
    }
    pearson(&xs, &ys)
}

fn directed_assortativity(adj: &Adjacency) -> DirectedAssortativity {
    let kout: Vec<f64> = adj.out.iter().map(|l| l.len() as f64).collect();
    let kin: Vec<f64> = adj.inn.iter().map(|l| l.len() as f64).collect();
    let corr = |src: &[f64], dst: &[f64]| {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, targets) in adj.out.iter().enumerate() {
            for &j in targets {
                xs.push(src[i]);
                ys.push(dst[j]);
            }
        }
        pearson(&xs, &ys)
    };
    DirectedAssortativity {
        out_in: corr(&kout, &kin),
        in_out: corr(&kin, &kout),
        out_out: corr(&kout, &kout),
        in_in: corr(&kin, &kin),
    }
}

pub fn structural_report(network: &FlowNetwork) -> Result<StructuralReport> {
    let n = network.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty network".into()));
    }
    let adj = Adjacency::new(network);
    let links = adj.links();
    let mutual = (0..n)
        .map(|i| {
            adj.out[i]
                .iter()
                .filter(|&&j| network.weights[(j, i)] > 0.0)
                .count()
        })
        .sum::<usize>();
    let pairs = n * (n - 1);
    let paths = path_totals(&adj);
    let (clustering_coefficient, degree) = clustering(&adj);

    Ok(StructuralReport {
        nodes: n,
        links,
        density: if pairs == 0 {
            0.0
        } else {
            links as f64 / pairs as f64
        },
        reciprocity: if links == 0 {
            0.0
        } else {
            mutual as f64 / links as f64
        },
        clustering_coefficient,
        diameter: (paths.reachable_pairs > 0).then_some(paths.diameter),
        average_path_length: (paths.reachable_pairs > 0)
            .then(|| paths.distance_sum / paths.reachable_pairs as f64),
        strongly_connected: paths.reachable_pairs == pairs,
        average_betweenness: mean_nonzero(paths.betweenness.iter().copied()),
        assortativity: undirected_assortativity(&adj, &degree),
        assortativity_directed: directed_assortativity(&adj),
        average_in_degree: mean_nonzero(adj.inn.iter().map(|l| l.len() as f64)),
        average_out_degree: mean_nonzero(adj.out.iter().map(|l| l.len() as f64)),
        average_in_strength: mean_nonzero(network.in_strengths().into_iter()),
        average_out_strength: mean_nonzero(network.out_strengths().into_iter()),
        averages_over_nonzero: true,
    })
}

/// Per-node betweenness (ordered pairs, endpoints excluded).
pub fn betweenness(network: &FlowNetwork) -> Vec<f64> {
    path_totals(&Adjacency::new(network)).betweenness
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    /// Number of strictly positive strengths used.
    pub count: usize,
    pub mu_ln: f64,
    pub sigma_ln: f64,
    pub mu_log10: f64,
    pub sigma_log10: f64,
    /// `(x, P(X >= x))` over the positive strengths, ascending in `x`.
    pub ccdf: Vec<(f64, f64)>,
}

impl LogNormalFit {
    pub fn mu(&self, base: LogBase) -> f64 {
        match base {
            LogBase::Natural => self.mu_ln,
            LogBase::Ten => self.mu_log10,
        }
    }

    pub fn sigma(&self, base: LogBase) -> f64 {
        match base {
            LogBase::Natural => self.sigma_ln,
            LogBase::Ten => self.sigma_log10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthFit {
    pub in_strength: Vec<f64>,
    pub out_strength: Vec<f64>,
    pub in_fit: LogNormalFit,
    pub out_fit: LogNormalFit,
}

/// Mean and population standard deviation of the log of positive values.
pub fn log_normal_fit(values: &[f64]) -> Result<LogNormalFit> {
    let mut positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::ZeroStrength);
    }
    positive.sort_by(f64::total_cmp);
    let moments = |logs: Vec<f64>| {
        let m = logs.len() as f64;
        let mu = logs.iter().sum::<f64>() / m;
        let var = logs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m;
        (mu, var.sqrt())
    };
    let (mu_ln, sigma_ln) = moments(positive.iter().map(|x| x.ln()).collect());
    let (mu_log10, sigma_log10) = moments(positive.iter().map(|x| x.log10()).collect());
    let count = positive.len();
    let mut ccdf = Vec::with_capacity(count);
    let mut first_of_run = 0;
    for (k, &x) in positive.iter().enumerate() {
        if k == 0 || x != positive[k - 1] {
            first_of_run = k;
        }
        ccdf.push((x, (count - first_of_run) as f64 / count as f64));
    }
    Ok(LogNormalFit {
        count,
        mu_ln,
        sigma_ln,
        mu_log10,
        sigma_log10,
        ccdf,
    })
}

pub fn strength_fit(network: &FlowNetwork) -> Result<StrengthFit> {
    let in_strength = network.in_strengths();
    let out_strength = network.out_strengths();
    Ok(StrengthFit {
        in_fit: log_normal_fit(&in_strength)?,
        out_fit: log_normal_fit(&out_strength)?,
        in_strength,
        out_strength,
    })
}
