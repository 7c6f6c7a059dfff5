//! Synthetic worker populations with planted skill domains and planted wage
//! effects.
//!
//! All randomness comes from a ChaCha8 stream seeded by `SynthConfig::seed`,
//! so a configuration fully determines the population.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econo::DEFAULT_TARGET_SKILLS;
use crate::profiles::{normalize_skill, WorkerProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDomain {
    pub name: String,
    pub size: usize,
    /// Skills placed in this domain by name; the remaining slots are named
    /// `"<domain name> NN"`.
    #[serde(default)]
    pub named_skills: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySpec {
    pub code: String,
    pub weight: f64,
    pub wage_offset: f64,
}

/// Wage effect of holding `skill`. A domain-specific effect applies to
/// workers whose home domain is `domain` and overrides the `ALL` effect
/// (`domain == None`) there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffect {
    pub skill: String,
    pub domain: Option<usize>,
    pub effect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_workers: usize,
    pub domains: Vec<PlantedDomain>,
    /// Inclusive range of skills drawn per worker.
    pub skills_per_worker: (usize, usize),
    /// Probability that a drawn skill comes from a domain other than home.
    pub cross_domain_leak: f64,
    /// Skills every worker additionally holds with the given probability,
    /// independent of home domain.
    #[serde(default)]
    pub adoption: Vec<(String, f64)>,
    pub countries: Vec<CountrySpec>,
    pub effects: Vec<PlantedEffect>,
    /// Coefficient on log(earned + 1).
    pub gamma: f64,
    /// Wage effect per diversity level 1, 2, ...; the last entry applies to
    /// its level and above.
    pub diversity_effects: Vec<f64>,
    pub noise_sd: f64,
    pub base_wage: f64,
    pub wage_floor: f64,
    /// Mean and standard deviation of log earnings for earning workers.
    pub earned_log_mean: f64,
    pub earned_log_sd: f64,
    /// Share of workers with zero earnings.
    pub zero_earned_share: f64,
}

pub const DEFAULT_DOMAIN_NAMES: [&str; 7] = [
    "3d design",
    "admin support",
    "audio design",
    "graphic design",
    "legal",
    "software",
    "translation",
];

impl Default for SynthConfig {
    /// 15,000 workers over 7 planted domains of 50 skills. The 14 default
    /// target languages live in the software domain and are adopted by
    /// 3% of all workers each. `java` is worth +10 in `3d design`, −10 in
    /// `translation` and −3 elsewhere; `python` is worth +6 except in
    /// `3d design`, where it is worth nothing.
    fn default() -> Self {
        let domains = DEFAULT_DOMAIN_NAMES
            .iter()
            .map(|&name| PlantedDomain {
                name: name.to_string(),
                size: 50,
                named_skills: if name == "software" {
                    DEFAULT_TARGET_SKILLS
                        .iter()
                        .map(|s| s.to_string())
                        .collect()
                } else {
                    Vec::new()
                },
            })
            .collect();
        let all_effects = [
            ("python", 6.0),
            ("java", -3.0),
            ("javascript", 10.0),
            ("c++", 13.0),
            ("c#", 3.0),
            ("kotlin", 4.0),
            ("swift", -1.5),
            ("sql", 2.5),
            ("r", 1.0),
            ("php", 1.5),
            ("matlab", 2.0),
            ("scala", -7.0),
            ("go", -4.0),
            ("ruby", 0.0),
        ];
        let mut effects: Vec<PlantedEffect> = all_effects
            .iter()
            .map(|&(skill, effect)| PlantedEffect {
                skill: skill.into(),
                domain: None,
                effect,
            })
            .collect();
        effects.extend([
            PlantedEffect {
                skill: "java".into(),
                domain: Some(0),
                effect: 10.0,
            },
            PlantedEffect {
                skill: "java".into(),
                domain: Some(6),
                effect: -10.0,
            },
            PlantedEffect {
                skill: "python".into(),
                domain: Some(0),
                effect: 0.0,
            },
        ]);
        let countries = [
            ("US", 0.25, 12.0),
            ("IN", 0.20, -6.0),
            ("UA", 0.15, 0.0),
            ("GB", 0.10, 9.0),
            ("PH", 0.10, -7.0),
            ("DE", 0.10, 8.0),
            ("PK", 0.10, -5.0),
        ]
        .iter()
        .map(|&(code, weight, wage_offset)| CountrySpec {
            code: code.into(),
            weight,
            wage_offset,
        })
        .collect();

        SynthConfig {
            seed: 0,
            n_workers: 15_000,
            domains,
            skills_per_worker: (3, 8),
            cross_domain_leak: 0.15,
            adoption: DEFAULT_TARGET_SKILLS
                .iter()
                .map(|s| (s.to_string(), 0.03))
                .collect(),
            countries,
            effects,
            gamma: 3.0,
            diversity_effects: vec![0.0, 2.0, 4.0, 5.0, 7.0],
            noise_sd: 8.0,
            base_wage: 30.0,
            wage_floor: 1.0,
            earned_log_mean: 1000f64.ln(),
            earned_log_sd: 1.5,
            zero_earned_share: 0.05,
        }
    }
}

impl SynthConfig {
    /// Skill keys per planted domain.
    pub fn domain_skills(&self) -> Vec<Vec<String>> {
        self.domains
            .iter()
            .map(|d| {
                let mut skills: Vec<String> = d.named_skills.iter().take(d.size).cloned().collect();
                let mut i = 0;
                while skills.len() < d.size {
                    skills.push(format!("{} {:02}", d.name, i));
                    i += 1;
                }
                skills
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.domains.is_empty() {
            return bad("at least one domain is required".into());
        }
        if self.domains.iter().any(|d| d.size == 0) {
            return bad("domain sizes must be at least 1".into());
        }
        let (lo, hi) = self.skills_per_worker;
        if lo == 0 || lo > hi {
            return bad(format!("skills per worker range {lo}..={hi} is invalid"));
        }
        if !prob(self.cross_domain_leak) || !prob(self.zero_earned_share) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        if self.adoption.iter().any(|(_, p)| !prob(*p)) {
            return bad("adoption probabilities must lie in [0, 1]".into());
        }
        if [self.noise_sd, self.earned_log_sd]
            .iter()
            .any(|sd| sd.is_nan() || *sd < 0.0)
        {
            return bad("standard deviations must be non-negative".into());
        }
        if self.wage_floor.is_nan() || self.wage_floor <= 0.0 {
            return bad("wage floor must be positive".into());
        }
        if self.countries.is_empty()
            || self
                .countries
                .iter()
                .any(|c| c.weight.is_nan() || c.weight <= 0.0)
        {
            return bad("countries need positive weights".into());
        }
        if self.diversity_effects.is_empty() {
            return bad("diversity effects need at least one level".into());
        }
        let skills = self.domain_skills();
        let mut all = BTreeSet::new();
        for key in skills.iter().flatten() {
            if normalize_skill(key).ok().as_deref() != Some(key.as_str()) {
                return bad(format!("skill `{key}` is not a canonical key"));
            }
            if !all.insert(key.as_str()) {
                return bad(format!("skill `{key}` appears in more than one slot"));
            }
        }
        for (skill, _) in &self.adoption {
            if !all.contains(skill.as_str()) {
                return bad(format!("adopted skill `{skill}` is not in any domain"));
            }
        }
        for e in &self.effects {
            if !all.contains(e.skill.as_str()) {
                return bad(format!("effect skill `{}` is not in any domain", e.skill));
            }
            if e.domain.is_some_and(|d| d >= self.domains.len()) {
                return bad(format!("effect domain {:?} out of range", e.domain));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    /// Planted domain of every skill key.
    pub skill_domain: BTreeMap<String, usize>,
    /// Home domain per worker, in population order.
    pub home_domain: Vec<usize>,
}

impl GroundTruth {
    /// Planted ALL-domain effect of a skill, if any.
    pub fn effect(&self, skill: &str, domain: Option<usize>) -> Option<f64> {
        self.config
            .effects
            .iter()
            .find(|e| e.skill == skill && e.domain == domain)
            .map(|e| e.effect)
    }

    /// Skills whose effect does not depend on the worker's domain.
    pub fn uniform_effects(&self) -> Vec<(String, f64)> {
        self.config
            .effects
            .iter()
            .filter(|e| e.domain.is_none())
            .filter(|e| {
                !self
                    .config
                    .effects
                    .iter()
                    .any(|o| o.skill == e.skill && o.domain.is_some())
            })
            .map(|e| (e.skill.clone(), e.effect))
            .collect()
    }

    /// Domain-specific effects as `(skill, planted domain, effect)`.
    pub fn domain_effects(&self) -> Vec<(String, usize, f64)> {
        self.config
            .effects
            .iter()
            .filter_map(|e| e.domain.map(|d| (e.skill.clone(), d, e.effect)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPopulation {
    pub profiles: Vec<WorkerProfile>,
    pub truth: GroundTruth,
}

/// Draws a population from `config`.
pub fn generate_population(config: &SynthConfig) -> Result<SyntheticPopulation, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let domain_skills = config.domain_skills();
    let skill_domain: BTreeMap<String, usize> = domain_skills
        .iter()
        .enumerate()
        .flat_map(|(d, skills)| skills.iter().map(move |s| (s.clone(), d)))
        .collect();
    let n_domains = domain_skills.len();
    let total_weight: f64 = config.countries.iter().map(|c| c.weight).sum();
    let noise = Normal::new(0.0, config.noise_sd).expect("validated sd");
    let log_earned =
        Normal::new(config.earned_log_mean, config.earned_log_sd).expect("validated sd");

    let mut effect_all: BTreeMap<&str, f64> = BTreeMap::new();
    let mut effect_in: BTreeMap<(&str, usize), f64> = BTreeMap::new();
    for e in &config.effects {
        match e.domain {
            None => {
                effect_all.insert(&e.skill, e.effect);
            }
            Some(d) => {
                effect_in.insert((&e.skill, d), e.effect);
            }
        }
    }
    let total_skills: usize = domain_skills.iter().map(Vec::len).sum();
    let width = config.n_workers.to_string().len().max(5);

    let mut profiles = Vec::with_capacity(config.n_workers);
    let mut homes = Vec::with_capacity(config.n_workers);
    for i in 0..config.n_workers {
        let home = rng.random_range(0..n_domains);
        let (lo, hi) = config.skills_per_worker;
        let k = rng.random_range(lo..=hi).min(total_skills);
        let mut skills: BTreeSet<String> = BTreeSet::new();
        let mut attempts = 0;
        while skills.len() < k && attempts < 100 * k {
            attempts += 1;
            let domain = if n_domains > 1 && rng.random_bool(config.cross_domain_leak) {
                let other = rng.random_range(0..n_domains - 1);
                if other >= home {
                    other + 1
                } else {
                    other
                }
            } else {
                home
            };
            let pool = &domain_skills[domain];
            skills.insert(pool[rng.random_range(0..pool.len())].clone());
        }
        for (skill, p) in &config.adoption {
            if rng.random_bool(*p) {
                skills.insert(skill.clone());
            }
        }

        let c = rng.random::<f64>() * total_weight;
        let mut acc = 0.0;
        let country = config
            .countries
            .iter()
            .find(|cs| {
                acc += cs.weight;
                c < acc
            })
            .unwrap_or_else(|| config.countries.last().unwrap());

        let zero = rng.random_bool(config.zero_earned_share);
        let draw = log_earned.sample(&mut rng);
        let earned = if zero {
            0.0
        } else {
            (draw.exp() * 100.0).round() / 100.0
        };

        let planted: BTreeSet<usize> = skills.iter().map(|s| skill_domain[s]).collect();
        let level = planted.len().min(config.diversity_effects.len());
        let skill_effect: f64 = skills
            .iter()
            .map(|s| {
                effect_in
                    .get(&(s.as_str(), home))
                    .or_else(|| effect_all.get(s.as_str()))
                    .copied()
                    .unwrap_or(0.0)
            })
            .sum();
        let eps = noise.sample(&mut rng);
        let wage = (config.base_wage
            + country.wage_offset
            + config.gamma * (earned + 1.0).ln()
            + skill_effect
            + config.diversity_effects[level - 1]
            + eps)
            .max(config.wage_floor);

        profiles.push(WorkerProfile {
            worker_id: format!("w{:0width$}", i + 1),
            country: country.code.clone(),
            wage,
            earned,
            skills,
        });
        homes.push(home);
    }

    Ok(SyntheticPopulation {
        profiles,
        truth: GroundTruth {
            config: config.clone(),
            skill_domain,
            home_domain: homes,
        },
    })
}
