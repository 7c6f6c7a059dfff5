//! Domain-conditioned skill values: the complementarity grid and the
//! what-if / recommendation queries answered from it.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econo::{
    build_design_matrix, dominant_domain, fit_design, median, ColumnKind, DesignMatrix, EconError,
    FeatureSpec, FitResult, SkillDomains,
};
use crate::profiles::WorkerProfile;

pub const DEFAULT_MIN_SUBSET_SIZE: usize = 100;

/// Attached to every rendered estimate.
pub const CAVEAT: &str =
    "Estimates are associations between skills and asking wages, not causal effects.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompassError {
    #[error("skill bundle is empty")]
    EmptyBundle,
    #[error("skill `{0}` is already in the bundle")]
    SkillAlreadyHeld(String),
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("skill `{0}` is not a target skill of the grid")]
    NotInGrid(String),
    #[error("unknown domain {0}")]
    UnknownDomain(usize),
    #[error("{}: {source}", match .domain { Some(d) => format!("domain {d}"), None => "full sample".to_string() })]
    Fit {
        domain: Option<usize>,
        source: EconError,
    },
}

impl From<EconError> for CompassError {
    fn from(err: EconError) -> Self {
        match err {
            EconError::UnknownSkill(s) => CompassError::UnknownSkill(s),
            EconError::EmptySkillSet => CompassError::EmptyBundle,
            other => CompassError::Fit {
                domain: None,
                source: other,
            },
        }
    }
}

/// One (skill, domain) estimate; `domain == None` is the full-sample column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub skill: String,
    pub domain: Option<usize>,
    pub beta: Option<f64>,
    pub se: Option<f64>,
    #[serde(with = "opt_lenient")]
    pub p: Option<f64>,
    pub stars: String,
    pub n: usize,
    pub percent_of_median: Option<f64>,
    pub excluded_reason: Option<String>,
}

impl GridCell {
    pub fn is_excluded(&self) -> bool {
        self.excluded_reason.is_some()
    }

    fn excluded(skill: &str, domain: usize, n: usize, reason: String) -> Self {
        GridCell {
            skill: skill.to_string(),
            domain: Some(domain),
            beta: None,
            se: None,
            p: None,
            stars: String::new(),
            n,
            percent_of_median: None,
            excluded_reason: Some(reason),
        }
    }

    fn from_fit(
        skill: &str,
        domain: Option<usize>,
        fit: &FitResult,
        median_wage: f64,
    ) -> Option<Self> {
        let c = fit.coefficient(&ColumnKind::Skill(skill.to_string()).name(0))?;
        Some(GridCell {
            skill: skill.to_string(),
            domain,
            beta: Some(c.estimate),
            se: Some(c.std_error),
            p: Some(c.p_value),
            stars: c.stars.clone(),
            n: fit.n_obs,
            percent_of_median: Some(100.0 * c.estimate / median_wage),
            excluded_reason: None,
        })
    }
}

mod opt_lenient {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::util::lenient_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Per-domain column metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainColumn {
    pub domain: usize,
    pub label: String,
    pub n: usize,
    pub median_wage: Option<f64>,
    /// Set when the whole column is excluded.
    pub excluded_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityGrid {
    pub target_skills: Vec<String>,
    pub min_subset_size: usize,
    pub all_n: usize,
    pub all_median_wage: f64,
    pub columns: Vec<DomainColumn>,
    /// Full-sample cells first (in target order), then one block per domain.
    pub cells: Vec<GridCell>,
}

impl ComplementarityGrid {
    pub fn cell(&self, skill: &str, domain: Option<usize>) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.skill == skill && c.domain == domain)
    }

    pub fn all_column(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.domain.is_none())
    }

    pub fn is_target(&self, skill: &str) -> bool {
        self.target_skills.iter().any(|s| s == skill)
    }

    /// Writes the grid table: `skill, domain, beta, se, p, stars, n,
    /// percent_of_median, excluded_reason`, tab separated, `ALL` for the
    /// full-sample column and empty fields for missing values.
    pub fn write_tsv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(
            sink,
            "skill\tdomain\tbeta\tse\tp\tstars\tn\tpercent_of_median\texcluded_reason"
        )?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for c in &self.cells {
            writeln!(
                sink,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.skill,
                c.domain
                    .map_or_else(|| "ALL".to_string(), |d| d.to_string()),
                opt(c.beta),
                opt(c.se),
                opt(c.p),
                c.stars,
                c.n,
                opt(c.percent_of_median),
                c.excluded_reason.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    /// Skill-by-domain text table of coefficients with stars.
    pub fn render_text(&self, skill_label: &dyn Fn(&str) -> String) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<20}{:>14}", "Skill", "ALL");
        for col in &self.columns {
            let _ = write!(out, "{:>16}", truncate(&col.label, 15));
        }
        let _ = writeln!(out);
        let _ = write!(out, "{:<20}{:>14}", "n", self.all_n);
        for col in &self.columns {
            let _ = write!(out, "{:>16}", col.n);
        }
        let _ = writeln!(out);
        let show = |c: Option<&GridCell>| match c {
            Some(GridCell {
                beta: Some(b),
                stars,
                ..
            }) => format!("{b:.3}{stars:<3}"),
            _ => "excl.".to_string(),
        };
        for skill in &self.target_skills {
            let _ = write!(
                out,
                "{:<20}{:>14}",
                truncate(&skill_label(skill), 19),
                show(self.cell(skill, None))
            );
            for col in &self.columns {
                let _ = write!(out, "{:>16}", show(self.cell(skill, Some(col.domain))));
            }
            let _ = writeln!(out);
        }
        let excluded: Vec<_> = self
            .columns
            .iter()
            .filter_map(|c| {
                c.excluded_reason
                    .as_ref()
                    .map(|r| format!("{}: {r}", c.label))
            })
            .collect();
        if !excluded.is_empty() {
            let _ = writeln!(out, "Excluded domains: {}", excluded.join("; "));
        }
        let _ = writeln!(out, "Note: *p<0.1; **p<0.05; ***p<0.01. {CAVEAT}");
        out
    }
}

fn truncate(s: &str, width: usize) -> String {
    s.chars().take(width).collect()
}

/// Workers whose dominant domain is `domain`.
pub fn subset_by_domain<'a>(
    profiles: &'a [WorkerProfile],
    domains: &SkillDomains,
    domain: usize,
) -> Result<Vec<&'a WorkerProfile>, CompassError> {
    if domain >= domains.domain_count() {
        return Err(CompassError::UnknownDomain(domain));
    }
    let mut out = Vec::new();
    for p in profiles {
        if dominant_domain(p, domains)? == domain {
            out.push(p);
        }
    }
    Ok(out)
}

/// Full-sample design and fit.
pub fn fit_full_sample(
    profiles: &[WorkerProfile],
    domains: &SkillDomains,
    spec: &FeatureSpec,
) -> Result<(DesignMatrix, FitResult), CompassError> {
    let design = build_design_matrix(profiles, domains, spec)?;
    let fit = fit_design(&design)?;
    Ok((design, fit))
}

/// Builds the grid: the full-sample column copied from `full_fit`, then one
/// domain-subset regression per domain without the domain dummy block.
/// Small subsets, target skills without variation inside a subset and
/// rank-deficient subset designs are excluded with a stated reason.
pub fn build_grid(
    profiles: &[WorkerProfile],
    domains: &SkillDomains,
    labels: &[String],
    spec: &FeatureSpec,
    min_subset_size: usize,
    full_fit: &FitResult,
) -> Result<ComplementarityGrid, CompassError> {
    let wages: Vec<f64> = profiles.iter().map(|p| p.wage).collect();
    let all_median = median(&wages).ok_or(CompassError::Fit {
        domain: None,
        source: EconError::EmptyPopulation,
    })?;
    let mut cells = Vec::new();
    for skill in &spec.target_skills {
        cells.push(
            GridCell::from_fit(skill, None, full_fit, all_median)
                .ok_or_else(|| CompassError::NotInGrid(skill.clone()))?,
        );
    }

    let mut buckets: Vec<Vec<WorkerProfile>> = vec![Vec::new(); domains.domain_count()];
    for p in profiles {
        buckets[dominant_domain(p, domains)?].push(p.clone());
    }

    let mut columns = Vec::new();
    for (domain, subset) in buckets.iter().enumerate() {
        let n = subset.len();
        let sub_wages: Vec<f64> = subset.iter().map(|p| p.wage).collect();
        let median_wage = median(&sub_wages);
        let mut column = DomainColumn {
            domain,
            label: labels
                .get(domain)
                .cloned()
                .unwrap_or_else(|| format!("domain {domain}")),
            n,
            median_wage,
            excluded_reason: None,
        };
        let exclude_all = |reason: String, cells: &mut Vec<GridCell>| {
            for skill in &spec.target_skills {
                cells.push(GridCell::excluded(skill, domain, n, reason.clone()));
            }
        };
        if n < min_subset_size.max(1) {
            let reason =
                format!("only {n} workers, below the minimum subset size {min_subset_size}");
            exclude_all(reason.clone(), &mut cells);
            column.excluded_reason = Some(reason);
            columns.push(column);
            continue;
        }

        let holders = |skill: &String| subset.iter().filter(|p| p.skills.contains(skill)).count();
        let mut varying = Vec::new();
        let mut constant = Vec::new();
        for skill in &spec.target_skills {
            let h = holders(skill);
            if h == 0 || h == n {
                constant.push((skill.clone(), h));
            } else {
                varying.push(skill.clone());
            }
        }
        let countries: HashSet<&str> = subset.iter().map(|p| p.country.as_str()).collect();
        let sub_spec = FeatureSpec {
            target_skills: varying,
            domain_dummies: false,
            domain_baseline: None,
            country_baseline: spec
                .country_baseline
                .clone()
                .filter(|c| countries.contains(c.as_str())),
            diversity_baseline: None,
            ..spec.clone()
        };
        let fitted = build_design_matrix(subset, domains, &sub_spec).and_then(|d| fit_design(&d));
        let fit = match fitted {
            Ok(fit) => fit,
            Err(err @ (EconError::RankDeficient(_) | EconError::Underdetermined { .. })) => {
                let reason = format!("subset regression not estimable: {err}");
                exclude_all(reason.clone(), &mut cells);
                column.excluded_reason = Some(reason);
                columns.push(column);
                continue;
            }
            Err(source) => {
                return Err(CompassError::Fit {
                    domain: Some(domain),
                    source,
                })
            }
        };
        let median_wage = median_wage.expect("subset is non-empty");
        for skill in &spec.target_skills {
            match constant.iter().find(|(s, _)| s == skill) {
                Some((_, h)) => cells.push(GridCell::excluded(
                    skill,
                    domain,
                    n,
                    format!("no variation in this domain: held by {h} of {n} workers"),
                )),
                None => cells.push(
                    GridCell::from_fit(skill, Some(domain), &fit, median_wage)
                        .expect("fitted target column"),
                ),
            }
        }
        columns.push(column);
    }

    Ok(ComplementarityGrid {
        target_skills: spec.target_skills.clone(),
        min_subset_size,
        all_n: full_fit.n_obs,
        all_median_wage: all_median,
        columns,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub candidate: String,
    pub delta: f64,
    pub se: f64,
    #[serde(with = "crate::util::lenient_f64")]
    pub p: f64,
    pub stars: String,
    pub percent_of_median: f64,
    /// Dominant domain of the bundle.
    pub domain: usize,
    pub domain_label: String,
    pub diversity: usize,
    /// Grid column the estimate came from; `None` is the full sample.
    pub column: Option<usize>,
    pub fallback: bool,
    pub caveat: String,
}

fn check_bundle(
    bundle: &[String],
    domains: &SkillDomains,
) -> Result<BTreeSet<String>, CompassError> {
    if bundle.is_empty() {
        return Err(CompassError::EmptyBundle);
    }
    let set: BTreeSet<String> = bundle.iter().cloned().collect();
    for key in &set {
        if !domains.contains(key) {
            return Err(CompassError::UnknownSkill(key.clone()));
        }
    }
    Ok(set)
}

/// Estimated wage change from adding `candidate` to `bundle`, read from the
/// bundle's dominant-domain column, or from the full-sample column (flagged
/// as a fallback) when that cell is excluded.
pub fn what_if(
    bundle: &[String],
    candidate: &str,
    grid: &ComplementarityGrid,
    domains: &SkillDomains,
) -> Result<WhatIf, CompassError> {
    let held = check_bundle(bundle, domains)?;
    if !domains.contains(candidate) {
        return Err(CompassError::UnknownSkill(candidate.to_string()));
    }
    if held.contains(candidate) {
        return Err(CompassError::SkillAlreadyHeld(candidate.to_string()));
    }
    if !grid.is_target(candidate) {
        return Err(CompassError::NotInGrid(candidate.to_string()));
    }
    let domain = domains.dominant_domain(held.iter().map(String::as_str))?;
    let diversity = domains.diversity(held.iter().map(String::as_str))?;
    let domain_label = grid
        .columns
        .iter()
        .find(|c| c.domain == domain)
        .map_or_else(|| format!("domain {domain}"), |c| c.label.clone());

    let (cell, fallback) = match grid.cell(candidate, Some(domain)) {
        Some(c) if !c.is_excluded() => (c, false),
        _ => (
            grid.cell(candidate, None)
                .ok_or_else(|| CompassError::NotInGrid(candidate.to_string()))?,
            true,
        ),
    };
    Ok(WhatIf {
        candidate: candidate.to_string(),
        delta: cell.beta.unwrap_or(f64::NAN),
        se: cell.se.unwrap_or(f64::NAN),
        p: cell.p.unwrap_or(f64::NAN),
        stars: cell.stars.clone(),
        percent_of_median: cell.percent_of_median.unwrap_or(f64::NAN),
        domain,
        domain_label,
        diversity,
        column: cell.domain,
        fallback,
        caveat: CAVEAT.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub skill: String,
    pub delta: f64,
    pub percent_of_median: f64,
    pub stars: String,
    #[serde(with = "crate::util::lenient_f64")]
    pub p: f64,
    pub fallback: bool,
}

/// Target skills not yet held whose estimate in the bundle's column is
/// significant at `alpha`, by descending wage delta (ties by key), at most
/// `top_n`.
pub fn recommend(
    bundle: &[String],
    grid: &ComplementarityGrid,
    domains: &SkillDomains,
    top_n: usize,
    alpha: f64,
) -> Result<Vec<Recommendation>, CompassError> {
    let held = check_bundle(bundle, domains)?;
    let mut out = Vec::new();
    for skill in &grid.target_skills {
        if held.contains(skill) {
            continue;
        }
        let w = what_if(bundle, skill, grid, domains)?;
        if w.p < alpha {
            out.push(Recommendation {
                skill: w.candidate,
                delta: w.delta,
                percent_of_median: w.percent_of_median,
                stars: w.stars,
                p: w.p,
                fallback: w.fallback,
            });
        }
    }
    out.sort_by(|a, b| {
        b.delta
            .total_cmp(&a.delta)
            .then_with(|| a.skill.cmp(&b.skill))
    });
    out.truncate(top_n);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::DomainPartition;
    use crate::skillnet::SkillGraph;

    /// Domains: 0 = {a, b, t1}, 1 = {c, d, t2}.
    fn setup() -> SkillDomains {
        let keys: Vec<String> = ["a", "b", "c", "d", "t1", "t2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let g = SkillGraph::from_edges(keys, [(0, 1, 1), (0, 4, 1), (2, 3, 1), (2, 5, 1)]).unwrap();
        let p = DomainPartition::from_assignment(&g, &[0, 0, 1, 1, 0, 1]).unwrap();
        SkillDomains::new(&g, &p)
    }

    fn cell(skill: &str, domain: Option<usize>, beta: f64, p: f64) -> GridCell {
        GridCell {
            skill: skill.into(),
            domain,
            beta: Some(beta),
            se: Some(1.0),
            p: Some(p),
            stars: crate::econo::stars(p).into(),
            n: 500,
            percent_of_median: Some(beta * 4.0),
            excluded_reason: None,
        }
    }

    fn grid() -> ComplementarityGrid {
        let mut cells = vec![cell("t1", None, 2.0, 0.01), cell("t2", None, 5.0, 0.2)];
        cells.push(cell("t1", Some(0), 1.0, 0.5));
        cells.push(cell("t2", Some(0), 8.0, 0.001));
        cells.push(GridCell::excluded("t1", 1, 10, "small".into()));
        cells.push(GridCell::excluded("t2", 1, 10, "small".into()));
        ComplementarityGrid {
            target_skills: vec!["t1".into(), "t2".into()],
            min_subset_size: 100,
            all_n: 1000,
            all_median_wage: 25.0,
            columns: vec![
                DomainColumn {
                    domain: 0,
                    label: "Zero".into(),
                    n: 500,
                    median_wage: Some(20.0),
                    excluded_reason: None,
                },
                DomainColumn {
                    domain: 1,
                    label: "One".into(),
                    n: 10,
                    median_wage: Some(30.0),
                    excluded_reason: Some("small".into()),
                },
            ],
            cells,
        }
    }

    fn bundle(keys: &[&str]) -> Vec<String> {
        keys.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn what_if_reads_domain_column() {
        let w = what_if(&bundle(&["a", "b"]), "t2", &grid(), &setup()).unwrap();
        assert_eq!(
            (w.delta, w.domain, w.column, w.fallback),
            (8.0, 0, Some(0), false)
        );
        assert_eq!(w.domain_label, "Zero");
        assert_eq!(w.caveat, CAVEAT);
    }

    #[test]
    fn what_if_falls_back_for_excluded_cells() {
        let w = what_if(&bundle(&["c"]), "t1", &grid(), &setup()).unwrap();
        assert_eq!(
            (w.delta, w.domain, w.column, w.fallback),
            (2.0, 1, None, true)
        );
    }

    #[test]
    fn what_if_errors() {
        let (g, d) = (grid(), setup());
        assert_eq!(
            what_if(&bundle(&["a", "t1"]), "t1", &g, &d),
            Err(CompassError::SkillAlreadyHeld("t1".into()))
        );
        assert_eq!(
            what_if(&bundle(&["a"]), "zz", &g, &d),
            Err(CompassError::UnknownSkill("zz".into()))
        );
        assert_eq!(
            what_if(&bundle(&["zz"]), "t1", &g, &d),
            Err(CompassError::UnknownSkill("zz".into()))
        );
        assert_eq!(
            what_if(&bundle(&["a"]), "b", &g, &d),
            Err(CompassError::NotInGrid("b".into()))
        );
        assert_eq!(what_if(&[], "t1", &g, &d), Err(CompassError::EmptyBundle));
    }

    #[test]
    fn recommend_filters_and_sorts() {
        let (g, d) = (grid(), setup());
        let recs = recommend(&bundle(&["a"]), &g, &d, 10, 0.05).unwrap();
        assert_eq!(
            recs.iter().map(|r| r.skill.as_str()).collect::<Vec<_>>(),
            ["t2"]
        );
        let recs = recommend(&bundle(&["a"]), &g, &d, 10, 1.0).unwrap();
        assert_eq!(
            recs.iter().map(|r| r.skill.as_str()).collect::<Vec<_>>(),
            ["t2", "t1"]
        );
        let recs = recommend(&bundle(&["a"]), &g, &d, 1, 1.0).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recommend(&bundle(&["a", "t1", "t2"]), &g, &d, 10, 1.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn subset_rejects_unknown_domain() {
        assert_eq!(
            subset_by_domain(&[], &setup(), 2).unwrap_err(),
            CompassError::UnknownDomain(2)
        );
        assert!(subset_by_domain(&[], &setup(), 1).unwrap().is_empty());
    }

    #[test]
    fn tsv_export_marks_all_and_exclusions() {
        let mut out = Vec::new();
        grid().write_tsv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1], "t1\tALL\t2\t1\t0.01\t**\t500\t8\t");
        assert_eq!(lines[5], "t1\t1\t\t\t\t\t10\t\tsmall");
    }
}
