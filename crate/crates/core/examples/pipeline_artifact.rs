//! Run every stage on a profile table, write the model artifact and reports,
//! then load the artifact back and verify it.
//!
//! cargo run --release --example pipeline_artifact -- [profiles.csv] [out_dir]

use std::path::PathBuf;

use anyhow::Result;
use skillcompass::artifact::{sha256_hex, ModelArtifact};
use skillcompass::pipeline::{run_pipeline, write_outputs, PipelineConfig, ARTIFACT_FILE};
use skillcompass::profiles::write_profiles;
use skillcompass::synth::{generate_population, SynthConfig};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let input = match args.next() {
        Some(path) => std::fs::read(path)?,
        None => {
            let mut bytes = Vec::new();
            write_profiles(
                &mut bytes,
                &generate_population(&SynthConfig::default())?.profiles,
            )?;
            bytes
        }
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "model-out".into()));

    let run = match run_pipeline(&input, &PipelineConfig::default()) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    for path in write_outputs(&run, &out)? {
        println!("wrote {}", path.display());
    }
    let bytes = std::fs::read(out.join(ARTIFACT_FILE))?;
    let loaded = ModelArtifact::from_bytes(&bytes)?;
    println!(
        "artifact sha256 {} verified: {} workers, {} domains, input sha256 {}",
        sha256_hex(&bytes),
        loaded.provenance.workers,
        loaded.partition.domain_count(),
        loaded.provenance.input_sha256
    );
    Ok(())
}
