//! Parse a worker profile table, report rejected rows and write the
//! canonical form.
//!
//! cargo run --example ingest_profiles -- [profiles.csv]

use anyhow::Result;
use skillcompass::profiles::{parse_profiles, validate_population, write_profiles, ProfileSchema};

const SAMPLE: &str = "\
worker_id,country,wage,earned,skills
w1,us,35,1200,Python| SQL |python
w2,IN,12.5,0,Data Entry|Excel
w3,DE,not a number,50,Figma
w4,GB,40,8000,
";

fn main() -> Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let parsed = parse_profiles(text.as_bytes(), &ProfileSchema::default())?;
    println!("{}", validate_population(&parsed.profiles)?);
    for r in &parsed.rejected {
        println!("rejected {}", r.error);
    }
    for key in parsed.lexicon.keys() {
        println!(
            "skill {key:?} displayed as {:?}",
            parsed.lexicon.display_of(key).unwrap_or(key)
        );
    }
    write_profiles(std::io::stdout().lock(), &parsed.profiles)?;
    Ok(())
}
