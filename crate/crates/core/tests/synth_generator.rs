mod common;

use std::collections::BTreeSet;

use skillcompass::compass::fit_full_sample;
use skillcompass::domains::{louvain, normalized_mutual_information, LouvainConfig};
use skillcompass::econo::{diversity, dominant_domain, FeatureSpec, SkillDomains};
use skillcompass::profiles::{
    parse_profiles, write_profiles, ProfileSchema, SkillLexicon, WorkerProfile,
};
use skillcompass::skillnet::SkillGraph;
use skillcompass::synth::{generate_population, SynthConfig, SynthError};

use common::*;

fn structure(profiles: &[WorkerProfile], seed: u64) -> (SkillLexicon, SkillGraph, SkillDomains) {
    let lexicon = SkillLexicon::from_keys(profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    let graph = SkillGraph::build(profiles, &lexicon).unwrap();
    let partition = louvain(
        &graph,
        LouvainConfig {
            resolution: 1.0,
            seed,
        },
    )
    .unwrap();
    let domains = SkillDomains::new(&graph, &partition);
    (lexicon, graph, domains)
}

#[test]
fn same_config_same_population() {
    let cfg = SynthConfig {
        n_workers: 500,
        seed: 12,
        ..SynthConfig::default()
    };
    assert_eq!(
        generate_population(&cfg).unwrap().profiles,
        generate_population(&cfg).unwrap().profiles
    );
    let other = SynthConfig { seed: 13, ..cfg };
    assert_ne!(
        generate_population(&SynthConfig {
            seed: 12,
            ..other.clone()
        })
        .unwrap()
        .profiles,
        generate_population(&other).unwrap().profiles
    );
}

#[test]
fn without_leakage_domains_never_mix() {
    let pop = generate_population(&SynthConfig {
        seed: 4,
        n_workers: 3000,
        cross_domain_leak: 0.0,
        adoption: vec![],
        ..SynthConfig::default()
    })
    .unwrap();
    let (_, graph, domains) = structure(&pop.profiles, 4);
    for (a, b, _) in graph.edges() {
        assert_eq!(
            pop.truth.skill_domain[graph.key(a)],
            pop.truth.skill_domain[graph.key(b)],
            "{} - {}",
            graph.key(a),
            graph.key(b)
        );
    }
    for (p, &home) in pop.profiles.iter().zip(&pop.truth.home_domain) {
        assert!(p.skills.iter().all(|s| pop.truth.skill_domain[s] == home));
        assert_eq!(diversity(p, &domains).unwrap(), 1);
    }
    let estimated = |k: &str| domains.domain(k).unwrap();
    let matched = match_domains(
        &pop.truth.skill_domain,
        &estimated,
        pop.truth.config.domains.len(),
    );
    assert_eq!(matched.iter().collect::<BTreeSet<_>>().len(), matched.len());
    for (p, &home) in pop.profiles.iter().zip(&pop.truth.home_domain) {
        assert_eq!(dominant_domain(p, &domains).unwrap(), matched[home]);
    }
}

#[test]
fn raising_a_planted_effect_raises_the_estimate_by_the_same_amount() {
    let base = SynthConfig {
        seed: 21,
        n_workers: 5000,
        ..SynthConfig::default()
    };
    let delta = 5.0;
    let mut bumped = base.clone();
    for e in bumped
        .effects
        .iter_mut()
        .filter(|e| e.skill == "python" && e.domain.is_none())
    {
        e.effect += delta;
    }
    let a = generate_population(&base).unwrap();
    let b = generate_population(&bumped).unwrap();
    let (_, _, domains) = structure(&a.profiles, 21);
    let spec = FeatureSpec::default();
    let (_, fa) = fit_full_sample(&a.profiles, &domains, &spec).unwrap();
    let (_, fb) = fit_full_sample(&b.profiles, &domains, &spec).unwrap();
    let ca = fa.coefficient("skill:python").unwrap();
    let cb = fb.coefficient("skill:python").unwrap();
    assert!((cb.estimate - ca.estimate - delta).abs() < 2.0 * ca.std_error);
    for other in ["java", "c++", "sql"] {
        let key = format!("skill:{other}");
        let shift = fb.coefficient(&key).unwrap().estimate - fa.coefficient(&key).unwrap().estimate;
        assert!(
            shift.abs() < 2.0 * fa.coefficient(&key).unwrap().std_error,
            "{other}"
        );
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let pop = generate_population(&SynthConfig {
        seed: 8,
        n_workers: 700,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut bytes = Vec::new();
    write_profiles(&mut bytes, &pop.profiles).unwrap();
    let parsed = parse_profiles(bytes.as_slice(), &ProfileSchema::default()).unwrap();
    assert!(parsed.rejected.is_empty());
    assert_eq!(parsed.profiles, pop.profiles);
    let mut again = Vec::new();
    write_profiles(&mut again, &parsed.profiles).unwrap();
    assert_eq!(bytes, again);
}

#[test]
fn default_scenario_domains_are_recovered() {
    for seed in 0..3 {
        let pop = generate_population(&SynthConfig {
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let (lexicon, graph, _) = structure(&pop.profiles, seed);
        let partition = louvain(
            &graph,
            LouvainConfig {
                resolution: 1.0,
                seed,
            },
        )
        .unwrap();
        let planted: Vec<usize> = lexicon
            .keys()
            .iter()
            .map(|k| pop.truth.skill_domain[k])
            .collect();
        let nmi = normalized_mutual_information(&planted, partition.assignment());
        assert!(nmi >= 0.95, "seed {seed}: {nmi}");
        assert!((nmi - nmi_oracle(&planted, partition.assignment())).abs() < 1e-12);
    }
}

#[test]
fn population_respects_configured_ranges() {
    let cfg = SynthConfig {
        seed: 2,
        n_workers: 2000,
        ..SynthConfig::default()
    };
    let pop = generate_population(&cfg).unwrap();
    let codes: BTreeSet<&str> = cfg.countries.iter().map(|c| c.code.as_str()).collect();
    let adopted: BTreeSet<&str> = cfg.adoption.iter().map(|(s, _)| s.as_str()).collect();
    for p in &pop.profiles {
        assert!(codes.contains(p.country.as_str()));
        assert!(p.wage >= cfg.wage_floor);
        assert!(p.earned >= 0.0);
        let own = p
            .skills
            .iter()
            .filter(|s| !adopted.contains(s.as_str()))
            .count();
        assert!(own <= cfg.skills_per_worker.1);
        assert!(!p.skills.is_empty());
    }
    let zero = pop.profiles.iter().filter(|p| p.earned == 0.0).count() as f64 / 2000.0;
    assert!((zero - cfg.zero_earned_share).abs() < 0.02);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        SynthConfig {
            domains: vec![],
            ..SynthConfig::default()
        },
        SynthConfig {
            skills_per_worker: (4, 2),
            ..SynthConfig::default()
        },
        SynthConfig {
            cross_domain_leak: 1.5,
            ..SynthConfig::default()
        },
        SynthConfig {
            noise_sd: -1.0,
            ..SynthConfig::default()
        },
        SynthConfig {
            countries: vec![],
            ..SynthConfig::default()
        },
        SynthConfig {
            adoption: vec![("cobol".into(), 0.1)],
            ..SynthConfig::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(
            generate_population(&cfg),
            Err(SynthError::InvalidConfig(_))
        ));
    }
}
