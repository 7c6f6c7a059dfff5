//! Skill domains: modularity, Louvain partitioning, labelling and
//! penetration of flagged skill sets.

mod louvain;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use louvain::{initial_order, louvain_with_order, LouvainConfig, LouvainOutcome, MIN_GAIN};

use crate::profiles::{normalize_skill, SkillLexicon};
use crate::skillnet::{top_k_by_degree, SkillGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("unknown domain {0}")]
    UnknownDomain(usize),
    #[error("assignment covers {got} nodes, graph has {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("label override line {line}: {reason}")]
    BadOverride { line: usize, reason: String },
}

/// Classic modularity of `assignment` (one community id per node).
pub fn modularity(graph: &SkillGraph, assignment: &[usize]) -> Result<f64, DomainError> {
    modularity_with_resolution(graph, assignment, 1.0)
}

/// `Σ_c [ w_in(c)/m − γ (w_tot(c)/2m)² ]`.
pub fn modularity_with_resolution(
    graph: &SkillGraph,
    assignment: &[usize],
    resolution: f64,
) -> Result<f64, DomainError> {
    if assignment.len() != graph.node_count() {
        return Err(DomainError::AssignmentLength {
            expected: graph.node_count(),
            got: assignment.len(),
        });
    }
    let m = graph.total_edge_weight() as f64;
    if m == 0.0 {
        return Err(DomainError::EmptyGraph);
    }
    let k = assignment.iter().max().map_or(0, |&c| c + 1);
    let mut inner = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (a, b, w) in graph.edges() {
        let w = w as f64;
        total[assignment[a]] += w;
        total[assignment[b]] += w;
        if assignment[a] == assignment[b] {
            inner[assignment[a]] += w;
        }
    }
    Ok(inner
        .iter()
        .zip(&total)
        .map(|(&i, &t)| i / m - resolution * (t / (2.0 * m)).powi(2))
        .sum())
}

/// Assignment of every graph node to a domain, with labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPartition {
    keys: Vec<String>,
    assignment: Vec<usize>,
    labels: Vec<String>,
    /// Highest-degree members per domain, filled by [`label_domains`].
    top_skills: Vec<Vec<(String, usize)>>,
    modularity: f64,
    resolution: f64,
    pass_history: Vec<f64>,
}

impl DomainPartition {
    /// Partition from an explicit assignment; domain ids are made dense in
    /// order of first appearance and labels default to `"domain <id>"`.
    pub fn from_assignment(graph: &SkillGraph, assignment: &[usize]) -> Result<Self, DomainError> {
        let q = modularity(graph, assignment)?;
        let mut seen = std::collections::HashMap::new();
        let dense: Vec<usize> = assignment
            .iter()
            .map(|&c| {
                let next = seen.len();
                *seen.entry(c).or_insert(next)
            })
            .collect();
        Ok(Self::assemble(graph, dense, q, 1.0, vec![q]))
    }

    fn assemble(
        graph: &SkillGraph,
        assignment: Vec<usize>,
        modularity: f64,
        resolution: f64,
        pass_history: Vec<f64>,
    ) -> Self {
        let count = assignment.iter().max().map_or(0, |&c| c + 1);
        DomainPartition {
            keys: graph.keys().to_vec(),
            assignment,
            labels: (0..count).map(|d| format!("domain {d}")).collect(),
            top_skills: vec![Vec::new(); count],
            modularity,
            resolution,
            pass_history,
        }
    }

    pub fn domain_count(&self) -> usize {
        self.labels.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn domain_of(&self, key: &str) -> Option<usize> {
        // keys built from a lexicon are sorted; fall back to a scan otherwise
        self.keys
            .binary_search_by(|k| k.as_str().cmp(key))
            .ok()
            .or_else(|| self.keys.iter().position(|k| k == key))
            .map(|i| self.assignment[i])
    }

    pub fn members(&self, domain: usize) -> impl Iterator<Item = &str> + '_ {
        self.keys
            .iter()
            .zip(&self.assignment)
            .filter(move |(_, &d)| d == domain)
            .map(|(k, _)| k.as_str())
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.domain_count()];
        for &d in &self.assignment {
            sizes[d] += 1;
        }
        sizes
    }

    pub fn label(&self, domain: usize) -> &str {
        &self.labels[domain]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn top_skills(&self, domain: usize) -> &[(String, usize)] {
        &self.top_skills[domain]
    }

    /// Classic (resolution 1) modularity of the assignment.
    pub fn modularity(&self) -> f64 {
        self.modularity
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Resolution-scaled objective before the first Louvain level and after
    /// each completed level.
    pub fn pass_history(&self) -> &[f64] {
        &self.pass_history
    }

    /// Checks the partition against a graph: same node keys, modularity
    /// matching a fresh recomputation.
    pub fn check_against(&self, graph: &SkillGraph) -> Result<(), String> {
        if self.keys != graph.keys() {
            return Err("partition keys differ from graph nodes".into());
        }
        if self.top_skills.len() != self.labels.len()
            || self.assignment.iter().any(|&d| d >= self.labels.len())
        {
            return Err("domain ids out of range".into());
        }
        let q = modularity(graph, &self.assignment).map_err(|e| e.to_string())?;
        if (q - self.modularity).abs() > 1e-12 {
            return Err(format!(
                "stored modularity {} differs from recomputed {q}",
                self.modularity
            ));
        }
        Ok(())
    }

    /// Writes `skill_key<TAB>domain_id<TAB>domain_label` lines sorted by key.
    pub fn write_tsv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        for (key, &d) in self.keys.iter().zip(&self.assignment) {
            writeln!(sink, "{key}\t{d}\t{}", self.labels[d])?;
        }
        Ok(())
    }
}

/// Louvain partition of the skill graph.
pub fn louvain(graph: &SkillGraph, config: LouvainConfig) -> Result<DomainPartition, DomainError> {
    let outcome = louvain::louvain(graph, config)?;
    partition_from_outcome(graph, outcome, config.resolution)
}

pub fn partition_from_outcome(
    graph: &SkillGraph,
    outcome: LouvainOutcome,
    resolution: f64,
) -> Result<DomainPartition, DomainError> {
    let q = modularity(graph, &outcome.communities)?;
    Ok(DomainPartition::assemble(
        graph,
        outcome.communities,
        q,
        resolution,
        outcome.pass_history,
    ))
}

/// Which domain a label override applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSelector {
    Domain(usize),
    /// The domain containing this skill key.
    Skill(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelOverrides(pub Vec<(LabelSelector, String)>);

impl LabelOverrides {
    /// Parses `selector<TAB>label` lines. A selector is a domain id or a skill
    /// name. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, DomainError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (selector, label) = line.split_once('\t').ok_or(DomainError::BadOverride {
                line: i + 1,
                reason: "expected selector<TAB>label".into(),
            })?;
            let label = label.trim();
            if label.is_empty() {
                return Err(DomainError::BadOverride {
                    line: i + 1,
                    reason: "empty label".into(),
                });
            }
            let selector = match selector.trim().parse::<usize>() {
                Ok(id) => LabelSelector::Domain(id),
                Err(_) => LabelSelector::Skill(normalize_skill(selector).map_err(|e| {
                    DomainError::BadOverride {
                        line: i + 1,
                        reason: e.to_string(),
                    }
                })?),
            };
            out.push((selector, label.to_string()));
        }
        Ok(LabelOverrides(out))
    }
}

/// Labels each domain by the display name of its highest-degree member and
/// keeps the top `k` members as metadata. Overrides are applied last, in
/// order; selectors that match nothing are ignored.
pub fn label_domains(
    graph: &SkillGraph,
    mut partition: DomainPartition,
    lexicon: &SkillLexicon,
    k: usize,
    overrides: &LabelOverrides,
) -> DomainPartition {
    for d in 0..partition.domain_count() {
        let top = top_k_by_degree(graph, partition.members(d), k.max(1));
        if let Some((key, _)) = top.first() {
            partition.labels[d] = lexicon.display_of(key).unwrap_or(key).to_string();
        }
        partition.top_skills[d] = top;
    }
    for (selector, label) in &overrides.0 {
        let target = match selector {
            LabelSelector::Domain(d) => Some(*d).filter(|&d| d < partition.domain_count()),
            LabelSelector::Skill(key) => partition.domain_of(key),
        };
        if let Some(d) = target {
            partition.labels[d] = label.clone();
        }
    }
    partition
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Penetration {
    pub domain: usize,
    pub count: usize,
    pub size: usize,
    pub share: f64,
}

/// Per-domain count and share of flagged skills.
pub fn cluster_penetration<'a, I>(
    partition: &DomainPartition,
    flagged: I,
) -> Result<Vec<Penetration>, DomainError>
where
    I: IntoIterator<Item = &'a str>,
{
    let sizes = partition.sizes();
    let mut counts = vec![0; sizes.len()];
    let flagged: BTreeSet<&str> = flagged.into_iter().collect();
    for key in flagged {
        let d = partition
            .domain_of(key)
            .ok_or_else(|| DomainError::UnknownSkill(key.to_string()))?;
        counts[d] += 1;
    }
    Ok(sizes
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(domain, (size, count))| Penetration {
            domain,
            count,
            size,
            share: if size == 0 {
                0.0
            } else {
                count as f64 / size as f64
            },
        })
        .collect())
}

/// Normalized mutual information `2 I(a;b) / (H(a) + H(b))` between two
/// labelings of the same items. Two single-cluster labelings score 1.
pub fn normalized_mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    let mut joint = std::collections::HashMap::new();
    let mut pa = std::collections::HashMap::new();
    let mut pb = std::collections::HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0.0) += 1.0;
        *pa.entry(x).or_insert(0.0) += 1.0;
        *pb.entry(y).or_insert(0.0) += 1.0;
    }
    let entropy = |counts: &std::collections::HashMap<usize, f64>| -> f64 {
        counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
    };
    let (ha, hb) = (entropy(&pa), entropy(&pb));
    if ha + hb == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c * n) / (pa[&x] * pb[&y])).ln())
        .sum();
    2.0 * mi / (ha + hb)
}

/// Table of top-degree skills per domain: `label  skill  degree` rows.
pub fn render_centrality_table(partition: &DomainPartition, lexicon: &SkillLexicon) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<28} {:>6}  Domain", "Skill", "Degree");
    for d in 0..partition.domain_count() {
        for (key, degree) in partition.top_skills(d) {
            let name = lexicon.display_of(key).unwrap_or(key);
            let _ = writeln!(out, "{name:<28} {degree:>6}  {}", partition.label(d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cliques(count: usize, size: usize) -> SkillGraph {
        let keys = (0..count * size).map(|i| format!("s{i:03}")).collect();
        let mut edges = Vec::new();
        for c in 0..count {
            for a in 0..size {
                for b in a + 1..size {
                    edges.push((c * size + a, c * size + b, 1));
                }
            }
        }
        SkillGraph::from_edges(keys, edges).unwrap()
    }

    #[test]
    fn one_community_has_zero_modularity() {
        let g = cliques(2, 10);
        assert!(modularity(&g, &[0; 20]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_cliques_have_half_modularity() {
        let g = cliques(2, 10);
        let assignment: Vec<usize> = (0..20).map(|i| i / 10).collect();
        assert!((modularity(&g, &assignment).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modularity_errors() {
        let g = SkillGraph::from_edges(vec!["a".into()], []).unwrap();
        assert_eq!(modularity(&g, &[0]), Err(DomainError::EmptyGraph));
        let g = cliques(1, 3);
        assert!(matches!(
            modularity(&g, &[0, 0]),
            Err(DomainError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn louvain_partition_is_consistent() {
        let g = cliques(3, 6);
        let p = louvain(&g, LouvainConfig::default()).unwrap();
        assert_eq!(p.domain_count(), 3);
        p.check_against(&g).unwrap();
        assert_eq!(p.sizes(), vec![6, 6, 6]);
    }

    fn lexicon(graph: &SkillGraph) -> SkillLexicon {
        SkillLexicon::from_entries(graph.keys().iter().map(|k| (k.clone(), k.to_uppercase())))
    }

    #[test]
    fn labels_use_top_degree_display_name() {
        // hub "data entry" touches three leaves; second component is a pair
        let keys: Vec<String> = ["a", "b", "c", "data entry", "x", "y"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let g = SkillGraph::from_edges(keys, [(3, 0, 1), (3, 1, 1), (3, 2, 1), (4, 5, 1)]).unwrap();
        let lex = SkillLexicon::from_entries(vec![
            ("a".into(), "A".into()),
            ("b".into(), "B".into()),
            ("c".into(), "C".into()),
            ("data entry".into(), "Data Entry".into()),
            ("x".into(), "X".into()),
            ("y".into(), "Y".into()),
        ]);
        let p = DomainPartition::from_assignment(&g, &[0, 0, 0, 0, 1, 1]).unwrap();
        let p = label_domains(&g, p, &lex, 5, &LabelOverrides::default());
        assert_eq!(p.label(0), "Data Entry");
        assert_eq!(p.top_skills(0)[0], ("data entry".to_string(), 3));
        assert_eq!(p.top_skills(0).len(), 4);
        assert_eq!(p.label(1), "X");

        let overrides = LabelOverrides::parse("0\tAdmin Support\n# comment\nY\tPair\n").unwrap();
        let p = label_domains(&g, p, &lex, 5, &overrides);
        assert_eq!(p.labels(), ["Admin Support", "Pair"]);
    }

    #[test]
    fn singleton_domain_labeled_by_member() {
        let keys = vec!["a".to_string(), "b".into(), "solo".into()];
        let g = SkillGraph::from_edges(keys, [(0, 1, 1)]).unwrap();
        let p = louvain(&g, LouvainConfig::default()).unwrap();
        let lex = lexicon(&g);
        let p = label_domains(&g, p, &lex, 5, &LabelOverrides::default());
        let solo = p.domain_of("solo").unwrap();
        assert_eq!(p.label(solo), "SOLO");
        assert_eq!(p.members(solo).collect::<Vec<_>>(), ["solo"]);
    }

    #[test]
    fn override_parse_errors() {
        assert!(matches!(
            LabelOverrides::parse("no tab here"),
            Err(DomainError::BadOverride { line: 1, .. })
        ));
        assert!(matches!(
            LabelOverrides::parse("\n3\t  "),
            Err(DomainError::BadOverride { line: 2, .. })
        ));
    }

    #[test]
    fn penetration_shares() {
        // one domain of 46 skills, 7 flagged
        let keys: Vec<String> = (0..46).map(|i| format!("legal {i:02}")).collect();
        let edges: Vec<_> = (1..46).map(|i| (0, i, 1)).collect();
        let g = SkillGraph::from_edges(keys.clone(), edges).unwrap();
        let p = DomainPartition::from_assignment(&g, &[0; 46]).unwrap();
        let flagged: Vec<&str> = keys[..7].iter().map(String::as_str).collect();
        let pen = cluster_penetration(&p, flagged).unwrap();
        assert_eq!(pen[0].count, 7);
        assert!((pen[0].share - 0.152).abs() < 5e-4);

        let none = cluster_penetration(&p, std::iter::empty()).unwrap();
        assert_eq!(none[0].share, 0.0);
        let all = cluster_penetration(&p, keys.iter().map(String::as_str)).unwrap();
        assert_eq!(all[0].share, 1.0);
        assert_eq!(
            cluster_penetration(&p, ["nope"]),
            Err(DomainError::UnknownSkill("nope".into()))
        );
    }

    #[test]
    fn nmi_bounds() {
        assert!((normalized_mutual_information(&[0, 0, 1, 1], &[5, 5, 2, 2]) - 1.0).abs() < 1e-12);
        assert!(normalized_mutual_information(&[0, 1, 0, 1], &[0, 0, 1, 1]).abs() < 1e-12);
        assert_eq!(normalized_mutual_information(&[0, 0], &[1, 1]), 1.0);
    }

    #[test]
    fn partition_tsv_export() {
        let g = cliques(2, 2);
        let p = DomainPartition::from_assignment(&g, &[0, 0, 1, 1]).unwrap();
        let mut out = Vec::new();
        p.write_tsv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "s000\t0\tdomain 0\ns001\t0\tdomain 0\ns002\t1\tdomain 1\ns003\t1\tdomain 1\n"
        );
    }
}
