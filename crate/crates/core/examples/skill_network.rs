//! Build the skill co-occurrence graph of a synthetic population and list the
//! most connected skills.
//!
//! cargo run --release --example skill_network -- [profiles.csv]

use anyhow::Result;
use skillcompass::profiles::{parse_profiles, ProfileSchema, SkillLexicon, WorkerProfile};
use skillcompass::skillnet::{top_k_by_degree, SkillGraph};
use skillcompass::synth::{generate_population, SynthConfig};

fn load() -> Result<(Vec<WorkerProfile>, SkillLexicon)> {
    if let Some(path) = std::env::args().nth(1) {
        let parsed = parse_profiles(std::fs::File::open(path)?, &ProfileSchema::default())?;
        return Ok((parsed.profiles, parsed.lexicon));
    }
    let pop = generate_population(&SynthConfig::default())?;
    let lexicon =
        SkillLexicon::from_keys(pop.profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    Ok((pop.profiles, lexicon))
}

fn main() -> Result<()> {
    let (profiles, lexicon) = load()?;
    let graph = SkillGraph::build(&profiles, &lexicon)?;
    println!(
        "{} workers, {} skills, {} edges, total pair weight {}",
        profiles.len(),
        graph.node_count(),
        graph.edge_count(),
        graph.total_edge_weight()
    );
    println!("\nhighest degree:");
    for (key, degree) in top_k_by_degree(&graph, lexicon.keys().iter().map(String::as_str), 10) {
        println!("{degree:>5}  {key}");
    }
    let mut heaviest: Vec<(usize, usize, u64)> = graph.edges().collect();
    heaviest.sort_by_key(|e| std::cmp::Reverse(e.2));
    println!("\nheaviest pairs:");
    for (a, b, w) in heaviest.into_iter().take(5) {
        println!("{w:>5}  {} + {}", graph.key(a), graph.key(b));
    }
    Ok(())
}
