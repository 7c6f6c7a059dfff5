//! Per-domain regressions: the same skill can pay differently depending on
//! the domain it is combined with.
//!
//! cargo run --release --example complementarity_grid

use anyhow::Result;
use skillcompass::compass::{build_grid, fit_full_sample};
use skillcompass::domains::{label_domains, louvain, LabelOverrides, LouvainConfig};
use skillcompass::econo::{FeatureSpec, SkillDomains};
use skillcompass::profiles::SkillLexicon;
use skillcompass::skillnet::SkillGraph;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let pop = generate_population(&SynthConfig::default())?;
    let lexicon =
        SkillLexicon::from_keys(pop.profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    let graph = SkillGraph::build(&pop.profiles, &lexicon)?;
    let overrides = LabelOverrides::parse(include_str!("../../../data/domain_labels.example.tsv"))?;
    let partition = label_domains(
        &graph,
        louvain(&graph, LouvainConfig::default())?,
        &lexicon,
        5,
        &overrides,
    );
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
    print!("{}", grid.render_text(&|s| s.to_string()));

    println!("\njava by domain:");
    for column in &grid.columns {
        let cell = grid
            .cell("java", Some(column.domain))
            .expect("grid covers every domain");
        match (cell.beta, cell.p) {
            (Some(b), Some(p)) => println!("  {:<16} {b:>7.2}  p = {p:.3}", column.label),
            _ => println!(
                "  {:<16} excluded: {}",
                column.label,
                cell.excluded_reason.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(())
}
