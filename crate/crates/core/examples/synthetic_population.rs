//! Generate a synthetic population with planted domains and wage effects and
//! write it as a profile table plus its ground truth.
//!
//! cargo run --example synthetic_population -- [out_dir] [seed]

use std::path::PathBuf;

use anyhow::Result;
use skillcompass::profiles::write_profiles;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;
    let config = SynthConfig {
        seed,
        ..SynthConfig::default()
    };
    let pop = generate_population(&config)?;
    std::fs::create_dir_all(&out)?;
    write_profiles(
        std::fs::File::create(out.join("profiles.csv"))?,
        &pop.profiles,
    )?;
    std::fs::write(
        out.join("truth.json"),
        serde_json::to_vec_pretty(&pop.truth)?,
    )?;

    for (d, domain) in config.domains.iter().enumerate() {
        let homes = pop.truth.home_domain.iter().filter(|&&h| h == d).count();
        println!(
            "{:<16} {:>3} skills, {homes:>5} workers at home",
            domain.name, domain.size
        );
    }
    println!("planted effects:");
    for e in &config.effects {
        match e.domain {
            None => println!("  {:<12} {:>+6.1}", e.skill, e.effect),
            Some(d) => println!(
                "  {:<12} {:>+6.1} in {}",
                e.skill, e.effect, config.domains[d].name
            ),
        }
    }
    println!("wrote {} workers to {}", pop.profiles.len(), out.display());
    Ok(())
}
