//! What-if and recommendation queries for a worker's skill bundle.
//!
//! cargo run --release --example what_if_compass -- "legal 01" "legal 02"

use anyhow::Result;
use skillcompass::compass::{build_grid, fit_full_sample, recommend, what_if};
use skillcompass::domains::{louvain, LouvainConfig};
use skillcompass::econo::{FeatureSpec, SkillDomains};
use skillcompass::profiles::{normalize_skill, SkillLexicon};
use skillcompass::skillnet::SkillGraph;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let mut bundle: Vec<String> = std::env::args()
        .skip(1)
        .map(|s| normalize_skill(&s))
        .collect::<Result<_, _>>()?;
    if bundle.is_empty() {
        bundle = vec![
            "3d design 00".into(),
            "3d design 01".into(),
            "3d design 02".into(),
        ];
    }
    let pop = generate_population(&SynthConfig::default())?;
    let lexicon =
        SkillLexicon::from_keys(pop.profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    let graph = SkillGraph::build(&pop.profiles, &lexicon)?;
    let partition = louvain(&graph, LouvainConfig::default())?;
    let domains = SkillDomains::new(&graph, &partition);
    let spec = FeatureSpec::default();
    let (_, full) = fit_full_sample(&pop.profiles, &domains, &spec)?;
    let grid = build_grid(
        &pop.profiles,
        &domains,
        partition.labels(),
        &spec,
        100,
        &full,
    )?;

    println!("bundle: {}", bundle.join(", "));
    for candidate in ["python", "java", "c++"] {
        match what_if(&bundle, candidate, &grid, &domains) {
            Ok(w) => println!(
                "+{candidate:<8} {:>+7.2} USD/h ({:.1}% of median){} {}",
                w.delta,
                w.percent_of_median,
                w.stars,
                if w.fallback {
                    "[full-sample estimate]"
                } else {
                    ""
                }
            ),
            Err(e) => println!("+{candidate:<8} {e}"),
        }
    }
    println!("\nrecommended additions:");
    for r in recommend(&bundle, &grid, &domains, 5, 0.05)? {
        println!("  {:<12} {:>+7.2}{}", r.skill, r.delta, r.stars);
    }
    println!("\n{}", skillcompass::compass::CAVEAT);
    Ok(())
}
