//! Greedy map-equation minimisation: repeated single-node moves, aggregation
//! of modules into super-nodes, and node-level refinement, restarted from
//! several shuffled node orders.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{stationary_unchecked, FlowGraph, TeleportMode, DEFAULT_TELEPORT_PROB, DEFAULT_VISIT_TOL};
use super::mapeq::{canonical_labels, partition_on, plogp, Partition};
use crate::error::Result;
use crate::network::FlowNetwork;

const MIN_IMPROVEMENT: f64 = 1e-12;
const MAX_PASSES: usize = 200;
const MAX_ROUNDS: usize = 20;
/// Below this many occupied modules every module is a move candidate, not
/// only linked ones: teleportation couples all nodes.
const ALL_MODULES_LIMIT: usize = 64;
/// Module merges tried per round, cheapest first.
const MERGE_KICKS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    pub teleport_prob: f64,
    pub teleport_mode: TeleportMode,
    pub seeds: usize,
    pub rng_seed: u64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            teleport_prob: DEFAULT_TELEPORT_PROB,
            teleport_mode: TeleportMode::Recorded,
            seeds: 10,
            rng_seed: 0,
        }
    }
}

/// Minimum-codelength partition over `options.seeds` restarts. Restart `s`
/// draws its node orders from ChaCha8 seeded with `rng_seed` on stream `s`,
/// so the result does not depend on scheduling.
pub fn detect_communities(network: &FlowNetwork, options: &DetectOptions) -> Result<Partition> {
    let n = network.len();
    if n == 0 {
        return Ok(Partition {
            assignment: Vec::new(),
            codelength: 0.0,
            modules: Vec::new(),
        });
    }
    let mut visits = stationary_unchecked(network, options.teleport_prob, DEFAULT_VISIT_TOL)?;
    visits.mode = options.teleport_mode;
    let graph = FlowGraph::new(network, &visits);

    let runs: Vec<Partition> = (0..options.seeds.max(1) as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.rng_seed);
            rng.set_stream(s);
            partition_on(&graph, &optimize(&graph, &mut rng))
        })
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.codelength.total_cmp(&b.codelength).then(i.cmp(j)))
        .map(|(_, p)| p)
        .expect("at least one restart");
    Ok(best)
}

fn optimize(graph: &FlowGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = graph.len();
    let mut best: Vec<usize> = (0..n).collect();
    let mut best_len = partition_on(graph, &best).codelength;

    for _ in 0..MAX_ROUNDS {
        let mut candidate = coarse_moves(graph, &best, rng);
        local_moving(graph, &mut candidate, rng, MAX_PASSES);
        let candidate = submodule_moves(graph, &candidate, rng);
        let candidate = merge_kicks(graph, candidate, rng);
        let len = partition_on(graph, &candidate).codelength;
        if len < best_len - MIN_IMPROVEMENT {
            best_len = len;
            best = candidate;
        } else {
            break;
        }
    }
    let one_module = vec![0; n];
    if partition_on(graph, &one_module).codelength < best_len - MIN_IMPROVEMENT {
        best = one_module;
    }
    best
}

/// Treats the modules of `start` as super-nodes and moves them, aggregating
/// after each level until nothing moves.
fn coarse_moves(graph: &FlowGraph, start: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (mut node_super, m) = canonical_labels(start);
    let mut level = graph.aggregate(&node_super, m);
    loop {
        let mut assign: Vec<usize> = (0..level.len()).collect();
        if !local_moving(&level, &mut assign, rng, MAX_PASSES) {
            break;
        }
        let (labels, m2) = canonical_labels(&assign);
        for x in node_super.iter_mut() {
            *x = labels[*x];
        }
        if m2 == level.len() {
            break;
        }
        level = level.aggregate(&labels, m2);
    }
    node_super
}

/// Merges the pairs of modules whose union costs least, even when the merge
/// alone lengthens the code, refines each merge by node moves and keeps the
/// best result.
fn merge_kicks(graph: &FlowGraph, partition: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (labels, m) = canonical_labels(&partition);
    if m < 2 {
        return partition;
    }
    let level = graph.aggregate(&labels, m);
    let pairs: Vec<(usize, usize)> = if m <= ALL_MODULES_LIMIT {
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect()
    } else {
        (0..m)
            .flat_map(|a| level.out[a].iter().map(move |&(b, _)| (a.min(b), a.max(b))))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let mut merged: Vec<(f64, (usize, usize))> = pairs
        .into_iter()
        .map(|(a, b)| {
            let assign: Vec<usize> = (0..m).map(|c| if c == b { a } else { c }).collect();
            (partition_on(&level, &assign).codelength, (a, b))
        })
        .collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut best_len = partition_on(graph, &labels).codelength;
    let mut best = labels.clone();
    for &(_, (a, b)) in merged.iter().take(MERGE_KICKS) {
        let mut candidate: Vec<usize> = labels.iter().map(|&c| if c == b { a } else { c }).collect();
        local_moving(graph, &mut candidate, rng, MAX_PASSES);
        let len = partition_on(graph, &candidate).codelength;
        if len < best_len - MIN_IMPROVEMENT {
            best_len = len;
            best = candidate;
        }
    }
    best
}

/// Splits every module into submodules by a single local-moving pass on the
/// module as a network of its own, then moves whole submodules between
/// modules and refines nodes.
/// Escapes optima where a group of nodes must change module together.
fn submodule_moves(graph: &FlowGraph, partition: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = graph.len();
    let (parent, m) = canonical_labels(partition);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for v in 0..n {
        members[parent[v]].push(v);
    }
    let mut sub = vec![0usize; n];
    let mut ms = 0;
    for group in &members {
        let inner = graph.restrict(group);
        let mut split: Vec<usize> = (0..group.len()).collect();
        local_moving(&inner, &mut split, rng, 1);
        let (split, count) = canonical_labels(&split);
        for (a, &v) in group.iter().enumerate() {
            sub[v] = ms + split[a];
        }
        ms += count;
    }
    let level = graph.aggregate(&sub, ms);
    let mut assign = vec![0; ms];
    for v in 0..n {
        assign[sub[v]] = parent[v];
    }
    local_moving(&level, &mut assign, rng, MAX_PASSES);
    let mut out: Vec<usize> = (0..n).map(|v| assign[sub[v]]).collect();
    local_moving(graph, &mut out, rng, MAX_PASSES);
    out
}

struct Modules {
    n_total: f64,
    flow: Vec<f64>,
    teleport: Vec<f64>,
    size: Vec<usize>,
    exit_links: Vec<f64>,
    count: Vec<usize>,
    empty: BTreeSet<usize>,
    sum_exit: f64,
}

impl Modules {
    fn new(graph: &FlowGraph, assign: &[usize]) -> Self {
        let k = graph.len();
        let mut m = Modules {
            n_total: graph.n_total as f64,
            flow: vec![0.0; k],
            teleport: vec![0.0; k],
            size: vec![0; k],
            exit_links: vec![0.0; k],
            count: vec![0; k],
            empty: BTreeSet::new(),
            sum_exit: 0.0,
        };
        for v in 0..k {
            let c = assign[v];
            m.flow[c] += graph.flow[v];
            m.teleport[c] += graph.teleport[v];
            m.size[c] += graph.size[v];
            m.count[c] += 1;
            for &(u, f) in &graph.out[v] {
                if assign[u] != c {
                    m.exit_links[c] += f;
                }
            }
        }
        m.empty = (0..k).filter(|&c| m.count[c] == 0).collect();
        m.sum_exit = (0..k).map(|c| m.exit(c)).sum();
        m
    }

    fn exit_of(&self, links: f64, teleport: f64, size: usize) -> f64 {
        if size == 0 {
            0.0
        } else {
            links + teleport * (self.n_total - size as f64) / self.n_total
        }
    }

    fn exit(&self, c: usize) -> f64 {
        self.exit_of(self.exit_links[c], self.teleport[c], self.size[c])
    }
}

/// One move candidate's effect on a module: new exit-link flow, teleport
/// mass, size and flow.
struct Moved {
    links: f64,
    teleport: f64,
    size: usize,
    flow: f64,
}

/// Moves nodes between modules while the codelength drops. Returns whether
/// any node moved. Module ids in `assign` must lie in `0..graph.len()`.
fn local_moving(graph: &FlowGraph, assign: &mut [usize], rng: &mut ChaCha8Rng, max_passes: usize) -> bool {
    let k = graph.len();
    if k <= 1 {
        return false;
    }
    let mut order: Vec<usize> = (0..k).collect();
    let mut out_to = vec![0.0; k];
    let mut in_from = vec![0.0; k];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_moved = false;

    for _ in 0..max_passes {
        let mut st = Modules::new(graph, assign);
        order.shuffle(rng);
        let mut moved = 0usize;

        for &v in &order {
            let a = assign[v];
            for &(u, f) in &graph.out[v] {
                let c = assign[u];
                if out_to[c] == 0.0 && in_from[c] == 0.0 {
                    touched.push(c);
                }
                out_to[c] += f;
            }
            for &(u, f) in &graph.inn[v] {
                let c = assign[u];
                if out_to[c] == 0.0 && in_from[c] == 0.0 {
                    touched.push(c);
                }
                in_from[c] += f;
            }

            let out_v = graph.out_total[v];
            let (p_v, t_v, s_v) = (graph.flow[v], graph.teleport[v], graph.size[v]);
            let alone = st.count[a] == 1;
            let old_a = Moved {
                links: st.exit_links[a],
                teleport: st.teleport[a],
                size: st.size[a],
                flow: st.flow[a],
            };
            let new_a = if alone {
                Moved {
                    links: 0.0,
                    teleport: 0.0,
                    size: 0,
                    flow: 0.0,
                }
            } else {
                Moved {
                    links: old_a.links - (out_v - out_to[a]) + in_from[a],
                    teleport: old_a.teleport - t_v,
                    size: old_a.size - s_v,
                    flow: old_a.flow - p_v,
                }
            };
            let q_a_old = st.exit_of(old_a.links, old_a.teleport, old_a.size);
            let q_a_new = st.exit_of(new_a.links, new_a.teleport, new_a.size);

            let occupied = k - st.empty.len();
            let mut candidates: Vec<usize> = if occupied <= ALL_MODULES_LIMIT {
                (0..k).filter(|&c| c != a && st.count[c] > 0).collect()
            } else {
                touched.iter().copied().filter(|&c| c != a).collect()
            };
            if !alone {
                if let Some(&e) = st.empty.iter().next() {
                    candidates.push(e);
                }
            }
            candidates.sort_unstable();
            candidates.dedup();

            let mut best: Option<(usize, f64)> = None;
            for &b in &candidates {
                let old_b = Moved {
                    links: st.exit_links[b],
                    teleport: st.teleport[b],
                    size: st.size[b],
                    flow: st.flow[b],
                };
                let new_b = Moved {
                    links: old_b.links + (out_v - out_to[b]) - in_from[b],
                    teleport: old_b.teleport + t_v,
                    size: old_b.size + s_v,
                    flow: old_b.flow + p_v,
                };
                let q_b_old = st.exit_of(old_b.links, old_b.teleport, old_b.size);
                let q_b_new = st.exit_of(new_b.links, new_b.teleport, new_b.size);
                let sum_new = st.sum_exit - q_a_old - q_b_old + q_a_new + q_b_new;
                let delta = plogp(sum_new)
                    - plogp(st.sum_exit)
                    - 2.0 * (plogp(q_a_new) + plogp(q_b_new) - plogp(q_a_old) - plogp(q_b_old))
                    + plogp(q_a_new + new_a.flow)
                    + plogp(q_b_new + new_b.flow)
                    - plogp(q_a_old + old_a.flow)
                    - plogp(q_b_old + old_b.flow);
                if best.is_none_or(|(_, d)| delta < d) {
                    best = Some((b, delta));
                }
            }

            if let Some((b, delta)) = best {
                if delta < -MIN_IMPROVEMENT {
                    let q_b_old = st.exit(b);
                    st.exit_links[a] = new_a.links;
                    st.teleport[a] = new_a.teleport;
                    st.size[a] = new_a.size;
                    st.flow[a] = new_a.flow;
                    st.count[a] -= 1;
                    st.exit_links[b] += (out_v - out_to[b]) - in_from[b];
                    st.teleport[b] += t_v;
                    st.size[b] += s_v;
                    st.flow[b] += p_v;
                    st.count[b] += 1;
                    if st.count[a] == 0 {
                        st.empty.insert(a);
                    }
                    st.empty.remove(&b);
                    st.sum_exit += st.exit(a) - q_a_old + st.exit(b) - q_b_old;
                    assign[v] = b;
                    moved += 1;
                }
            }

            for &c in &touched {
                out_to[c] = 0.0;
                in_from[c] = 0.0;
            }
            touched.clear();
        }

        if moved == 0 {
            break;
        }
        any_moved = true;
    }
    any_moved
}
