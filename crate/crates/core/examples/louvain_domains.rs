//! Detect skill domains with Louvain and compare them with the planted
//! domains of a synthetic population.
//!
//! cargo run --release --example louvain_domains -- [resolution]

use anyhow::Result;
use skillcompass::domains::{
    label_domains, louvain, normalized_mutual_information, render_centrality_table, LabelOverrides,
    LouvainConfig,
};
use skillcompass::profiles::SkillLexicon;
use skillcompass::skillnet::SkillGraph;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let resolution: f64 = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse())?;
    let pop = generate_population(&SynthConfig::default())?;
    let lexicon =
        SkillLexicon::from_keys(pop.profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    let graph = SkillGraph::build(&pop.profiles, &lexicon)?;
    let partition = louvain(
        &graph,
        LouvainConfig {
            resolution,
            seed: 7,
        },
    )?;

    let overrides = LabelOverrides::parse(include_str!("../../../data/domain_labels.example.tsv"))?;
    let partition = label_domains(&graph, partition, &lexicon, 5, &overrides);
    print!("{}", render_centrality_table(&partition, &lexicon));

    let planted: Vec<usize> = lexicon
        .keys()
        .iter()
        .map(|k| pop.truth.skill_domain[k])
        .collect();
    println!(
        "\n{} domains at resolution {resolution}, modularity {:.4}, NMI against planted domains {:.4}",
        partition.domain_count(),
        partition.modularity(),
        normalized_mutual_information(&planted, partition.assignment())
    );
    println!("modularity by pass: {:?}", partition.pass_history());
    Ok(())
}
