//! Descriptive wage statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::{diversity, diversity_level, dominant_domain, SkillDomains};
use super::EconError;
use crate::profiles::WorkerProfile;

pub const DEFAULT_MIN_GROUP_SIZE: usize = 30;

/// Median; even lengths average the two central order statistics.
pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Quantile by linear interpolation between order statistics
/// (`h = (n − 1) q`).
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// `100 × coef / median(wages)`.
pub fn percent_of_median(coef: f64, wages: &[f64]) -> Result<f64, EconError> {
    let m = median(wages).ok_or(EconError::EmptyPopulation)?;
    Ok(100.0 * coef / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grouping {
    Domain,
    DomainAndDiversity { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WageSummary {
    pub domain: usize,
    /// Capped diversity level when grouping by domain and diversity.
    pub diversity: Option<usize>,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub low_n: bool,
}

impl WageSummary {
    fn from_wages(
        domain: usize,
        diversity: Option<usize>,
        mut wages: Vec<f64>,
        min_size: usize,
    ) -> Self {
        wages.sort_by(f64::total_cmp);
        let q = |p| quantile_sorted(&wages, p).unwrap();
        WageSummary {
            domain,
            diversity,
            n: wages.len(),
            min: wages[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: wages[wages.len() - 1],
            low_n: wages.len() < min_size,
        }
    }
}

/// Five-number wage summaries per dominant domain (optionally split by
/// diversity level). Groups under `min_size` workers are flagged `low_n`.
pub fn wage_quartiles(
    profiles: &[WorkerProfile],
    domains: &SkillDomains,
    grouping: Grouping,
    min_size: usize,
) -> Result<Vec<WageSummary>, EconError> {
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<f64>> = BTreeMap::new();
    for p in profiles {
        let d = dominant_domain(p, domains)?;
        let level = match grouping {
            Grouping::Domain => None,
            Grouping::DomainAndDiversity { cap } => {
                Some(diversity_level(diversity(p, domains)?, cap))
            }
        };
        groups.entry((d, level)).or_default().push(p.wage);
    }
    Ok(groups
        .into_iter()
        .map(|((d, level), wages)| WageSummary::from_wages(d, level, wages, min_size))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_of_median_reconciles_reported_shares() {
        let wages = [20.0, 25.0, 30.0];
        assert!((percent_of_median(13.028, &wages).unwrap() - 52.112).abs() < 1e-9);
        assert!((percent_of_median(5.882, &wages).unwrap() - 23.528).abs() < 1e-9);
        assert_eq!(percent_of_median(0.0, &wages).unwrap(), 0.0);
        assert_eq!(percent_of_median(25.0, &wages).unwrap(), 100.0);
        assert!(percent_of_median(1.0, &[]).is_err());
    }

    #[test]
    fn even_median_averages_central_pair() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[7.0]), Some(7.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn eight_wage_quartiles_by_hand() {
        // sorted: 3 5 8 10 12 15 20 40; h = 7q
        let wages = [15.0, 3.0, 40.0, 8.0, 10.0, 5.0, 20.0, 12.0];
        // q1: h = 1.75 -> 5 + 0.75*3 = 7.25
        assert_eq!(quantile(&wages, 0.25), Some(7.25));
        // median: h = 3.5 -> 10 + 0.5*2 = 11
        assert_eq!(quantile(&wages, 0.5), Some(11.0));
        // q3: h = 5.25 -> 15 + 0.25*5 = 16.25
        assert_eq!(quantile(&wages, 0.75), Some(16.25));
        let s = WageSummary::from_wages(0, None, wages.to_vec(), 30);
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max),
            (3.0, 7.25, 11.0, 16.25, 40.0)
        );
        assert!(s.low_n);
    }

    #[test]
    fn single_worker_group() {
        let s = WageSummary::from_wages(2, Some(1), vec![12.5], 1);
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max, s.n),
            (12.5, 12.5, 12.5, 12.5, 12.5, 1)
        );
        assert!(!s.low_n);
    }
}
