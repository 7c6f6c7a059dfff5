//! Answer the service queries for a model artifact, and optionally serve
//! them over HTTP.
//!
//! cargo run --release --example query_service -- model-out/model.json [--serve]
//!
//! With `--serve` the address comes from SKILLCOMPASS_BIND (default
//! 127.0.0.1:8080). Example request:
//!
//! curl -s localhost:8080/whatif -H 'content-type: application/json' \
//!   -d '{"bundle": ["legal 01", "legal 02"], "candidate": "python"}'

use std::path::PathBuf;

use anyhow::{Context, Result};
use skillcompass::artifact::LoadedModel;
use skillcompass::service::{
    bind_address, domain_entries, recommend_query, serve, skill_entries, whatif_query,
};

#[tokio::main]
async fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = PathBuf::from(
        args.first()
            .context("usage: query_service <model.json> [--serve]")?,
    );
    let model = LoadedModel::load(&path)?;

    for d in domain_entries(&model) {
        println!("domain {} {:<20} {} skills", d.domain, d.label, d.size);
    }
    let top: Vec<String> = skill_entries(&model)
        .into_iter()
        .take(3)
        .map(|s| s.key)
        .collect();
    println!("top skills: {}", top.join(", "));

    let bundle = vec![top[0].clone()];
    match whatif_query(&model, &bundle, "python") {
        Ok(w) => println!("{}", serde_json::to_string_pretty(&w)?),
        Err(e) => println!("whatif: {e}"),
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&recommend_query(&model, &bundle, 3, 0.05)?)?
    );

    if args.iter().any(|a| a == "--serve") {
        let addr = bind_address(None)?;
        println!("serving on http://{addr}");
        serve(model, addr).await?;
    }
    Ok(())
}
