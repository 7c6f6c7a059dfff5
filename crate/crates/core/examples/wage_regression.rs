//! Full-sample hedonic wage regression on a synthetic population, with the
//! planted effects printed next to the estimates.
//!
//! cargo run --release --example wage_regression

use anyhow::Result;
use skillcompass::compass::fit_full_sample;
use skillcompass::domains::{louvain, LouvainConfig};
use skillcompass::econo::{detect_collinearity, FeatureSpec, SkillDomains};
use skillcompass::profiles::SkillLexicon;
use skillcompass::skillnet::SkillGraph;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let pop = generate_population(&SynthConfig::default())?;
    let lexicon =
        SkillLexicon::from_keys(pop.profiles.iter().flat_map(|p| p.skills.iter().cloned()));
    let graph = SkillGraph::build(&pop.profiles, &lexicon)?;
    let partition = louvain(&graph, LouvainConfig::default())?;
    let domains = SkillDomains::new(&graph, &partition);
    let (design, fit) = fit_full_sample(&pop.profiles, &domains, &FeatureSpec::default())?;

    println!(
        "{:<12} {:>9} {:>8} {:>9}",
        "skill", "estimate", "se", "planted"
    );
    for (skill, planted) in pop.truth.uniform_effects() {
        let c = fit
            .coefficient(&format!("skill:{skill}"))
            .expect("target skill column");
        println!(
            "{skill:<12} {:>9.3} {:>8.3} {planted:>9.3}",
            c.estimate, c.std_error
        );
    }
    let f = fit.f_test.as_ref().expect("model has regressors");
    println!(
        "\nn = {}, R² = {:.3}, adjusted R² = {:.3}, F = {:.1} on ({}, {})",
        fit.n_obs, fit.r_squared, fit.adj_r_squared, f.value, f.df1, f.df2
    );
    println!(
        "baselines: country {}, diversity {}, domain {:?}",
        design.baselines.country, design.baselines.diversity, design.baselines.domain
    );
    let report = detect_collinearity(&design.x, &design.names, 10.0);
    println!("columns with VIF above 10: {}", report.flagged().count());
    Ok(())
}
