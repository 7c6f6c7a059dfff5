//! Two-phase Louvain modularity maximization.
//!
//! Each level relabels its working graph so that node `r` is the `r`-th node
//! of that level's visit order; local moving then sweeps nodes in natural
//! order and breaks gain ties toward the lowest community id. Community ids
//! are therefore tied to the visit order, never to the caller's node ids.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DomainError;
use crate::skillnet::SkillGraph;

/// Smallest modularity improvement that justifies a move.
pub const MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LouvainConfig {
    pub resolution: f64,
    pub seed: u64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    /// Community per original node, dense ids in order of first appearance
    /// by node id.
    pub communities: Vec<usize>,
    /// Resolution-scaled modularity before the first level and after each
    /// completed level.
    pub pass_history: Vec<f64>,
    pub levels: usize,
}

#[derive(Debug, Clone)]
struct WorkGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    m: f64,
}

impl WorkGraph {
    fn from_skill_graph(graph: &SkillGraph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..graph.node_count())
            .map(|n| {
                graph
                    .neighbors(n)
                    .iter()
                    .map(|&(b, w)| (b, w as f64))
                    .collect()
            })
            .collect();
        WorkGraph {
            self_loop: vec![0.0; adj.len()],
            adj,
            m: graph.total_edge_weight() as f64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, node: usize) -> f64 {
        self.adj[node].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loop[node]
    }

    /// Node `r` of the result is node `order[r]` of `self`.
    fn relabel(&self, order: &[usize]) -> Self {
        let mut inverse = vec![0; order.len()];
        for (r, &old) in order.iter().enumerate() {
            inverse[old] = r;
        }
        let adj = order
            .iter()
            .map(|&old| {
                let mut row: Vec<(usize, f64)> = self.adj[old]
                    .iter()
                    .map(|&(b, w)| (inverse[b], w))
                    .collect();
                row.sort_unstable_by_key(|&(b, _)| b);
                row
            })
            .collect();
        WorkGraph {
            adj,
            self_loop: order.iter().map(|&old| self.self_loop[old]).collect(),
            m: self.m,
        }
    }

    fn modularity(&self, community: &[usize], resolution: f64) -> f64 {
        let k = community.iter().max().map_or(0, |&c| c + 1);
        let mut inner = vec![0.0; k];
        let mut total = vec![0.0; k];
        for node in 0..self.len() {
            let c = community[node];
            total[c] += self.degree(node);
            inner[c] += self.self_loop[node];
            for &(b, w) in &self.adj[node] {
                if b > node && community[b] == c {
                    inner[c] += w;
                }
            }
        }
        let two_m = 2.0 * self.m;
        inner
            .iter()
            .zip(&total)
            .map(|(&i, &t)| i / self.m - resolution * (t / two_m) * (t / two_m))
            .sum()
    }

    /// Collapses communities (dense ids) into super-nodes.
    fn aggregate(&self, community: &[usize], count: usize) -> Self {
        let mut self_loop = vec![0.0; count];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
        for node in 0..self.len() {
            let c = community[node];
            self_loop[c] += self.self_loop[node];
            for &(b, w) in &self.adj[node] {
                let cb = community[b];
                if cb == c {
                    if b > node {
                        self_loop[c] += w;
                    }
                } else {
                    *rows[c].entry(cb).or_default() += w;
                }
            }
        }
        WorkGraph {
            adj: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_loop,
            m: self.m,
        }
    }
}

/// Local moving until no node changes community. Returns dense community ids
/// (numbered by lowest member) and whether anything moved.
fn local_moving(graph: &WorkGraph, resolution: f64) -> (Vec<usize>, usize, bool) {
    let n = graph.len();
    let m = graph.m;
    let degree: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut community: Vec<usize> = (0..n).collect();
    let mut total = degree.clone();
    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    loop {
        let mut moved = false;
        for node in 0..n {
            let own = community[node];
            let k = degree[node];
            for &(b, w) in &graph.adj[node] {
                let c = community[b];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[own] -= k;
            let gain = |c: usize, link_c: f64| link_c - resolution * total[c] * k / (2.0 * m);
            let own_gain = gain(own, link[own]);

            touched.sort_unstable();
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(c, link[c]);
                if g > best_gain {
                    best = c;
                    best_gain = g;
                }
            }
            if best != own && (best_gain - own_gain) / m > MIN_GAIN {
                community[node] = best;
                total[best] += k;
                moved = true;
            } else {
                total[own] += k;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        moved_any = true;
    }

    let (dense, count) = renumber(&community);
    (dense, count, moved_any)
}

/// Dense ids in order of first appearance.
fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let dense = labels
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

/// Visit order used for the first level of a seeded run.
pub fn initial_order(node_count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..node_count).collect();
    order.shuffle(&mut rng);
    order
}

/// Seeded Louvain run.
pub fn louvain(graph: &SkillGraph, config: LouvainConfig) -> Result<LouvainOutcome, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.shuffle(&mut rng);
    run(graph, config.resolution, order, &mut rng)
}

/// Louvain with an explicit first-level visit order; later levels are
/// shuffled from `seed`. A seeded [`louvain`] call equals this function with
/// `initial_order(n, seed)` and the same seed.
pub fn louvain_with_order(
    graph: &SkillGraph,
    resolution: f64,
    order: Vec<usize>,
    seed: u64,
) -> Result<LouvainOutcome, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut discard: Vec<usize> = (0..graph.node_count()).collect();
    discard.shuffle(&mut rng);
    run(graph, resolution, order, &mut rng)
}

fn run(
    graph: &SkillGraph,
    resolution: f64,
    order: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<LouvainOutcome, DomainError> {
    if graph.total_edge_weight() == 0 {
        return Err(DomainError::EmptyGraph);
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(DomainError::InvalidResolution(resolution));
    }
    let n = graph.node_count();
    assert_eq!(order.len(), n, "visit order must cover every node");

    let mut work = WorkGraph::from_skill_graph(graph).relabel(&order);
    // original node -> node of the current working graph
    let mut membership = vec![0; n];
    for (r, &old) in order.iter().enumerate() {
        membership[old] = r;
    }
    let singletons: Vec<usize> = (0..work.len()).collect();
    let mut history = vec![work.modularity(&singletons, resolution)];
    let mut levels = 0;

    loop {
        let (community, count, moved) = local_moving(&work, resolution);
        if !moved {
            break;
        }
        levels += 1;
        let q = work.modularity(&community, resolution);
        let prev = *history.last().unwrap();
        assert!(
            q >= prev - 1e-12,
            "modularity decreased across Louvain levels: {prev} -> {q}"
        );
        history.push(q);
        for slot in membership.iter_mut() {
            *slot = community[*slot];
        }
        if count == work.len() {
            break;
        }
        let aggregated = work.aggregate(&community, count);
        let mut next_order: Vec<usize> = (0..count).collect();
        next_order.shuffle(rng);
        let mut inverse = vec![0; count];
        for (r, &old) in next_order.iter().enumerate() {
            inverse[old] = r;
        }
        for slot in membership.iter_mut() {
            *slot = inverse[*slot];
        }
        work = aggregated.relabel(&next_order);
    }

    let (communities, _) = renumber(&membership);
    Ok(LouvainOutcome {
        communities,
        pass_history: history,
        levels,
    })
}
