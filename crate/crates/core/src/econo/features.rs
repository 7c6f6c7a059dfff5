//! Worker-level domain features and design matrix assembly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::EconError;
use crate::domains::DomainPartition;
use crate::profiles::WorkerProfile;
use crate::skillnet::SkillGraph;

/// Default indicator features: popular programming languages.
pub const DEFAULT_TARGET_SKILLS: [&str; 14] = [
    "python",
    "java",
    "javascript",
    "c++",
    "c#",
    "kotlin",
    "swift",
    "sql",
    "r",
    "php",
    "matlab",
    "scala",
    "go",
    "ruby",
];

/// Domain id and unweighted degree per skill key.
#[derive(Debug, Clone, Default)]
pub struct SkillDomains {
    by_key: HashMap<String, (usize, usize)>,
    domain_count: usize,
}

impl SkillDomains {
    pub fn new(graph: &SkillGraph, partition: &DomainPartition) -> Self {
        let by_key = partition
            .keys()
            .iter()
            .zip(partition.assignment())
            .map(|(key, &d)| {
                let degree = graph.node(key).map_or(0, |n| graph.node_degree(n));
                (key.clone(), (d, degree))
            })
            .collect();
        SkillDomains {
            by_key,
            domain_count: partition.domain_count(),
        }
    }

    pub fn domain_count(&self) -> usize {
        self.domain_count
    }

    pub fn domain(&self, key: &str) -> Result<usize, EconError> {
        self.lookup(key).map(|(d, _)| d)
    }

    pub fn degree(&self, key: &str) -> Result<usize, EconError> {
        self.lookup(key).map(|(_, deg)| deg)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.by_key.contains_key(key)
    }

    fn lookup(&self, key: &str) -> Result<(usize, usize), EconError> {
        self.by_key
            .get(key)
            .copied()
            .ok_or_else(|| EconError::UnknownSkill(key.to_string()))
    }

    /// Domain holding the most of `skills`; ties go to the larger summed
    /// degree, then the lower domain id.
    pub fn dominant_domain<'a, I>(&self, skills: I) -> Result<usize, EconError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        // domain -> (count, summed degree)
        let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for key in skills {
            let (d, deg) = self.lookup(key)?;
            let entry = tally.entry(d).or_default();
            entry.0 += 1;
            entry.1 += deg;
        }
        tally
            .into_iter()
            .max_by(|(da, a), (db, b)| a.cmp(b).then(db.cmp(da)))
            .map(|(d, _)| d)
            .ok_or(EconError::EmptySkillSet)
    }

    /// Number of distinct domains among `skills`.
    pub fn diversity<'a, I>(&self, skills: I) -> Result<usize, EconError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut seen = BTreeSet::new();
        for key in skills {
            seen.insert(self.domain(key)?);
        }
        if seen.is_empty() {
            return Err(EconError::EmptySkillSet);
        }
        Ok(seen.len())
    }
}

/// Dominant domain of a worker.
pub fn dominant_domain(
    profile: &WorkerProfile,
    domains: &SkillDomains,
) -> Result<usize, EconError> {
    domains.dominant_domain(profile.skills.iter().map(String::as_str))
}

/// Count of distinct domains in a worker's skill set.
pub fn diversity(profile: &WorkerProfile, domains: &SkillDomains) -> Result<usize, EconError> {
    domains.diversity(profile.skills.iter().map(String::as_str))
}

/// Diversity level after pooling everything at or above `cap`.
pub fn diversity_level(diversity: usize, cap: usize) -> usize {
    diversity.min(cap)
}

pub fn diversity_level_name(level: usize, cap: usize) -> String {
    if level >= cap {
        format!("{cap}+")
    } else {
        level.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Canonical keys of the skills entering as indicator columns.
    pub target_skills: Vec<String>,
    /// Reference country; `None` picks the most frequent.
    pub country_baseline: Option<String>,
    /// Reference diversity level; `None` picks level 1 (or the lowest
    /// observed level).
    pub diversity_baseline: Option<usize>,
    /// Reference dominant domain; `None` picks the one with most workers.
    pub domain_baseline: Option<usize>,
    /// Added to earnings before taking the log.
    pub log_offset: f64,
    /// Diversity levels at or above this pool into one bucket.
    pub diversity_cap: usize,
    /// Regress log(wage) instead of wage.
    pub log_wage: bool,
    /// Include the dominant-domain dummy block.
    pub domain_dummies: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            target_skills: DEFAULT_TARGET_SKILLS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            country_baseline: None,
            diversity_baseline: None,
            domain_baseline: None,
            log_offset: 1.0,
            diversity_cap: 5,
            log_wage: false,
            domain_dummies: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum ColumnKind {
    Intercept,
    Country(String),
    LogEarned,
    Diversity(usize),
    Domain(usize),
    Skill(String),
}

impl ColumnKind {
    pub fn name(&self, diversity_cap: usize) -> String {
        match self {
            ColumnKind::Intercept => "(intercept)".into(),
            ColumnKind::Country(c) => format!("country:{c}"),
            ColumnKind::LogEarned => "log_earned".into(),
            ColumnKind::Diversity(l) => {
                format!("diversity:{}", diversity_level_name(*l, diversity_cap))
            }
            ColumnKind::Domain(d) => format!("domain:{d}"),
            ColumnKind::Skill(s) => format!("skill:{s}"),
        }
    }
}

/// Reference levels actually used for a design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub country: String,
    pub diversity: usize,
    pub domain: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub columns: Vec<ColumnKind>,
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub baselines: Baselines,
    pub dominant_domains: Vec<usize>,
    pub diversities: Vec<usize>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, kind: &ColumnKind) -> Option<usize> {
        self.columns.iter().position(|c| c == kind)
    }
}

fn most_frequent<T: Ord + Clone>(values: impl Iterator<Item = T>) -> Option<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    // BTreeMap order makes ties resolve to the smallest value
    counts
        .into_iter()
        .fold(None, |best: Option<(T, usize)>, (v, n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((v, n)),
        })
        .map(|(v, _)| v)
}

/// Assembles intercept, country dummies, log earnings, diversity dummies,
/// dominant-domain dummies and target-skill indicators, in that order.
/// Dummy groups cover only the levels present in `profiles`.
pub fn build_design_matrix(
    profiles: &[WorkerProfile],
    domains: &SkillDomains,
    spec: &FeatureSpec,
) -> Result<DesignMatrix, EconError> {
    if profiles.is_empty() {
        return Err(EconError::EmptyPopulation);
    }
    if spec.diversity_cap == 0 {
        return Err(EconError::InvalidSpec(
            "diversity cap must be at least 1".into(),
        ));
    }
    if spec.log_offset.is_nan() || spec.log_offset < 0.0 {
        return Err(EconError::InvalidSpec(
            "log offset must be non-negative".into(),
        ));
    }
    for skill in &spec.target_skills {
        if !domains.contains(skill) {
            return Err(EconError::UnknownSkill(skill.clone()));
        }
    }
    let mut dominant = Vec::with_capacity(profiles.len());
    let mut levels = Vec::with_capacity(profiles.len());
    for p in profiles {
        dominant.push(dominant_domain(p, domains)?);
        levels.push(diversity_level(diversity(p, domains)?, spec.diversity_cap));
    }

    let countries: BTreeSet<&str> = profiles.iter().map(|p| p.country.as_str()).collect();
    let country_baseline = match &spec.country_baseline {
        Some(c) if countries.contains(c.as_str()) => c.clone(),
        Some(c) => {
            return Err(EconError::BaselineNotFound {
                kind: "country",
                value: c.clone(),
            })
        }
        None => most_frequent(profiles.iter().map(|p| p.country.as_str()))
            .unwrap()
            .to_string(),
    };
    let level_set: BTreeSet<usize> = levels.iter().copied().collect();
    let diversity_baseline = match spec.diversity_baseline {
        Some(l) if level_set.contains(&diversity_level(l, spec.diversity_cap)) => {
            diversity_level(l, spec.diversity_cap)
        }
        Some(l) => {
            return Err(EconError::BaselineNotFound {
                kind: "diversity",
                value: l.to_string(),
            })
        }
        None => *level_set.iter().next().unwrap(),
    };
    let domain_set: BTreeSet<usize> = dominant.iter().copied().collect();
    let domain_baseline = if spec.domain_dummies {
        Some(match spec.domain_baseline {
            Some(d) if domain_set.contains(&d) => d,
            Some(d) => {
                return Err(EconError::BaselineNotFound {
                    kind: "domain",
                    value: d.to_string(),
                })
            }
            None => most_frequent(dominant.iter().copied()).unwrap(),
        })
    } else {
        None
    };

    let mut columns = vec![ColumnKind::Intercept];
    columns.extend(
        countries
            .iter()
            .filter(|&&c| c != country_baseline)
            .map(|c| ColumnKind::Country(c.to_string())),
    );
    columns.push(ColumnKind::LogEarned);
    columns.extend(
        level_set
            .iter()
            .filter(|&&l| l != diversity_baseline)
            .map(|&l| ColumnKind::Diversity(l)),
    );
    if let Some(base) = domain_baseline {
        columns.extend(
            domain_set
                .iter()
                .filter(|&&d| d != base)
                .map(|&d| ColumnKind::Domain(d)),
        );
    }
    columns.extend(spec.target_skills.iter().cloned().map(ColumnKind::Skill));

    let n = profiles.len();
    let x = DMatrix::from_fn(n, columns.len(), |i, j| {
        let p = &profiles[i];
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match &columns[j] {
            ColumnKind::Intercept => 1.0,
            ColumnKind::Country(c) => flag(&p.country == c),
            ColumnKind::LogEarned => (p.earned + spec.log_offset).ln(),
            ColumnKind::Diversity(l) => flag(levels[i] == *l),
            ColumnKind::Domain(d) => flag(dominant[i] == *d),
            ColumnKind::Skill(s) => flag(p.skills.contains(s)),
        }
    });
    if spec.log_offset == 0.0 && profiles.iter().any(|p| p.earned == 0.0) {
        return Err(EconError::InvalidSpec(
            "log offset 0 with zero-earned workers gives log(0)".into(),
        ));
    }
    let y = DVector::from_iterator(
        n,
        profiles
            .iter()
            .map(|p| if spec.log_wage { p.wage.ln() } else { p.wage }),
    );
    let names = columns.iter().map(|c| c.name(spec.diversity_cap)).collect();

    Ok(DesignMatrix {
        columns,
        names,
        x,
        y,
        baselines: Baselines {
            country: country_baseline,
            diversity: diversity_baseline,
            domain: domain_baseline,
        },
        dominant_domains: dominant,
        diversities: levels,
    })
}
