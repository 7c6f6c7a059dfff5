//! Weighted skill co-occurrence network and degree statistics.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::{SkillLexicon, WorkerProfile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("invalid edge ({0}, {1}): self-loop or node out of range")]
    InvalidEdge(usize, usize),
}

/// Undirected skill graph. Node ids match the lexicon ids it was built from;
/// edge weights count the workers holding both endpoint skills.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillGraph {
    keys: Vec<String>,
    index: HashMap<String, usize>,
    /// Sorted neighbor lists.
    adjacency: Vec<Vec<(usize, u64)>>,
    total_edge_weight: u64,
}

impl SkillGraph {
    /// Builds the co-occurrence graph: every worker with `k` skills adds one
    /// to each of the `k*(k-1)/2` pairs it holds.
    pub fn build(profiles: &[WorkerProfile], lexicon: &SkillLexicon) -> Result<Self, GraphError> {
        let mut pairs: HashMap<(usize, usize), u64> = HashMap::new();
        let mut ids = Vec::new();
        for profile in profiles {
            ids.clear();
            for skill in &profile.skills {
                ids.push(
                    lexicon
                        .id(skill)
                        .ok_or_else(|| GraphError::UnknownSkill(skill.clone()))?,
                );
            }
            ids.sort_unstable();
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    *pairs.entry((a, b)).or_default() += 1;
                }
            }
        }
        let edges = pairs.into_iter().map(|((a, b), w)| (a, b, w));
        Self::from_edges(lexicon.keys().to_vec(), edges)
    }

    /// Builds a graph from explicit `(a, b, weight)` triples; repeated pairs
    /// accumulate and zero weights are ignored.
    pub fn from_edges<I>(keys: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let n = keys.len();
        let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); n];
        let mut total = 0;
        for (a, b, w) in edges {
            if a == b || a >= n || b >= n {
                return Err(GraphError::InvalidEdge(a, b));
            }
            if w == 0 {
                continue;
            }
            *rows[a].entry(b).or_default() += w;
            *rows[b].entry(a).or_default() += w;
            total += w;
        }
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Ok(SkillGraph {
            keys,
            index,
            adjacency: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            total_edge_weight: total,
        })
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sum of edge weights, each undirected edge counted once.
    pub fn total_edge_weight(&self) -> u64 {
        self.total_edge_weight
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn key(&self, node: usize) -> &str {
        &self.keys[node]
    }

    pub fn node(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, u64)] {
        &self.adjacency[node]
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .map_or(0, |i| self.adjacency[a][i].1)
    }

    /// Unweighted degree of a node id.
    pub fn node_degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn weighted_degree(&self, node: usize) -> u64 {
        self.adjacency[node].iter().map(|&(_, w)| w).sum()
    }

    /// Number of distinct neighbors of `skill`, ignoring weights.
    pub fn degree(&self, skill: &str) -> Result<usize, GraphError> {
        self.node(skill)
            .map(|n| self.node_degree(n))
            .ok_or_else(|| GraphError::UnknownSkill(skill.to_string()))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Edges as `(a, b, weight)` with `a < b` by node id.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, row)| {
            row.iter()
                .filter(move |&&(b, _)| b > a)
                .map(move |&(b, w)| (a, b, w))
        })
    }

    /// Writes `key_a<TAB>key_b<TAB>weight` lines with `key_a < key_b`,
    /// sorted.
    pub fn write_edge_list<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        let mut lines: Vec<(&str, &str, u64)> = self
            .edges()
            .map(|(a, b, w)| {
                let (ka, kb) = (self.key(a), self.key(b));
                if ka < kb {
                    (ka, kb, w)
                } else {
                    (kb, ka, w)
                }
            })
            .collect();
        lines.sort_unstable();
        for (a, b, w) in lines {
            writeln!(sink, "{a}\t{b}\t{w}")?;
        }
        Ok(())
    }
}

/// Serialized form: keys plus an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeListRecord {
    pub keys: Vec<String>,
    pub edges: Vec<(usize, usize, u64)>,
}

impl From<&SkillGraph> for EdgeListRecord {
    fn from(graph: &SkillGraph) -> Self {
        EdgeListRecord {
            keys: graph.keys.clone(),
            edges: graph.edges().collect(),
        }
    }
}

impl TryFrom<EdgeListRecord> for SkillGraph {
    type Error = GraphError;

    fn try_from(record: EdgeListRecord) -> Result<Self, GraphError> {
        SkillGraph::from_edges(record.keys, record.edges)
    }
}

/// The `k` highest-degree skills among `members`, by descending degree with
/// ties broken by key. Keys not in the graph are skipped.
pub fn top_k_by_degree<'a, I>(graph: &SkillGraph, members: I, k: usize) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut ranked: Vec<(&str, usize)> = members
        .into_iter()
        .filter_map(|key| graph.node(key).map(|n| (key, graph.node_degree(n))))
        .collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.dedup_by(|a, b| a.0 == b.0);
    ranked
        .into_iter()
        .take(k)
        .map(|(key, d)| (key.to_string(), d))
        .collect()
}
