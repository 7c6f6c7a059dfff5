mod common;

use std::path::PathBuf;

use skillcompass::artifact::{sha256_hex, ArtifactError, LoadedModel, ModelArtifact};
use skillcompass::pipeline::{
    render_regression, run_pipeline, write_outputs, PipelineConfig, PipelineError, ARTIFACT_FILE,
    EXIT_INPUT, EXIT_MODEL,
};
use skillcompass::profiles::write_profiles;
use skillcompass::synth::{generate_population, SynthConfig};

use common::*;

const BLESS_ENV: &str = "SKILLCOMPASS_BLESS";

fn synthetic_csv(seed: u64, n_workers: usize) -> Vec<u8> {
    let pop = generate_population(&SynthConfig {
        seed,
        n_workers,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut bytes = Vec::new();
    write_profiles(&mut bytes, &pop.profiles).unwrap();
    bytes
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os(BLESS_ENV).is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing {}; rerun with {BLESS_ENV}=1", path.display()));
    assert_eq!(
        actual, expected,
        "{name} drifted; rerun with {BLESS_ENV}=1 after review"
    );
}

/// The artifact as it reads back from disk: residuals are not persisted.
fn stored_form(artifact: &ModelArtifact) -> ModelArtifact {
    let mut out = artifact.clone();
    out.full_fit.residuals.clear();
    out
}

#[test]
fn same_input_same_artifact_bytes() {
    let csv = synthetic_csv(3, 3000);
    let cfg = PipelineConfig {
        seed: 3,
        ..PipelineConfig::default()
    };
    let a = run_pipeline(&csv, &cfg)
        .unwrap()
        .artifact
        .to_bytes()
        .unwrap();
    let b = run_pipeline(&csv, &cfg)
        .unwrap()
        .artifact
        .to_bytes()
        .unwrap();
    assert_eq!(sha256_hex(&a), sha256_hex(&b));

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let files_a = write_outputs(&run_pipeline(&csv, &cfg).unwrap(), dir_a.path()).unwrap();
    write_outputs(&run_pipeline(&csv, &cfg).unwrap(), dir_b.path()).unwrap();
    for path in files_a {
        let name = path.file_name().unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir_b.path().join(name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn created_at_is_recorded_only_when_given() {
    let csv = synthetic_csv(4, 1500);
    let plain = run_pipeline(&csv, &PipelineConfig::default())
        .unwrap()
        .artifact;
    let text = String::from_utf8(plain.to_bytes().unwrap()).unwrap();
    assert!(!text.contains("created_at"));
    let stamped = run_pipeline(
        &csv,
        &PipelineConfig {
            created_at: Some("2024-01-01T00:00:00Z".into()),
            ..PipelineConfig::default()
        },
    )
    .unwrap()
    .artifact;
    assert_eq!(
        stamped.provenance.created_at.as_deref(),
        Some("2024-01-01T00:00:00Z")
    );
    assert_eq!(plain.provenance.input_sha256, sha256_hex(&csv));
}

#[test]
fn artifact_round_trips_and_serves_identical_answers() {
    let csv = synthetic_csv(5, 3000);
    let run = run_pipeline(&csv, &PipelineConfig::default()).unwrap();
    let bytes = run.artifact.to_bytes().unwrap();
    let loaded = ModelArtifact::from_bytes(&bytes).unwrap();
    assert_eq!(loaded, stored_form(&run.artifact));
    assert_eq!(loaded.to_bytes().unwrap(), bytes);

    let model = LoadedModel::new(loaded).unwrap();
    assert_eq!(model.graph, run.analysis.graph);
    for p in &run.analysis.profiles {
        let skills: Vec<&str> = p.skills.iter().map(String::as_str).collect();
        assert_eq!(
            model
                .domains
                .dominant_domain(skills.iter().copied())
                .unwrap(),
            run.analysis
                .domains
                .dominant_domain(skills.iter().copied())
                .unwrap()
        );
    }
}

#[test]
fn tampering_is_detected() {
    let csv = synthetic_csv(6, 2000);
    let artifact = run_pipeline(&csv, &PipelineConfig::default())
        .unwrap()
        .artifact;
    let text = String::from_utf8(artifact.to_bytes().unwrap()).unwrap();

    let needle = format!("\"workers\": {}", artifact.provenance.workers);
    let edited = text.replacen(&needle, "\"workers\": 1", 1);
    assert_ne!(edited, text);
    assert!(matches!(
        ModelArtifact::from_bytes(edited.as_bytes()),
        Err(ArtifactError::Checksum { .. })
    ));

    // Edits with a recomputed checksum still fail the consistency checks.
    let mut forged = artifact.clone();
    forged.grid.cells[0].beta = forged.grid.cells[0].beta.map(|b| b + 1.0);
    assert!(matches!(
        ModelArtifact::from_bytes(&forged.to_bytes().unwrap()),
        Err(ArtifactError::Inconsistent(_))
    ));
    let mut value = serde_json::to_value(&artifact).unwrap();
    let assignment = value["partition"]["assignment"].as_array_mut().unwrap();
    let first = assignment.iter().position(|d| d != &assignment[0]).unwrap();
    assignment.swap(0, first);
    let forged: ModelArtifact = serde_json::from_value(value).unwrap();
    assert!(ModelArtifact::from_bytes(&forged.to_bytes().unwrap()).is_err());

    let mut versioned = artifact.clone();
    versioned.format_version += 1;
    assert!(matches!(
        ModelArtifact::from_bytes(&versioned.to_bytes().unwrap()),
        Err(ArtifactError::Version { .. })
    ));
    assert!(matches!(
        ModelArtifact::from_bytes(b"{not json"),
        Err(ArtifactError::Parse(_))
    ));
}

#[test]
fn written_outputs_load_back() {
    let csv = synthetic_csv(7, 2000);
    let run = run_pipeline(&csv, &PipelineConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&run, dir.path()).unwrap();
    assert_eq!(written.len(), 10);
    let model = LoadedModel::load(&dir.path().join(ARTIFACT_FILE)).unwrap();
    assert_eq!(model.artifact, stored_form(&run.artifact));
    let edges = std::fs::read_to_string(dir.path().join("edges.tsv")).unwrap();
    assert_eq!(edges.lines().count(), run.analysis.graph.edge_count());
}

#[test]
fn malformed_input_is_a_stage_annotated_input_error() {
    let bad = b"worker_id,country,wage,earned,skills\nw1,US,abc,10,python|sql\n";
    let err = run_pipeline(bad, &PipelineConfig::default()).unwrap_err();
    assert_eq!(err.stage(), "ingest");
    assert_eq!(err.exit_code(), EXIT_INPUT);
    let message = err.to_string();
    assert!(message.starts_with("ingest: "), "{message}");
    assert!(message.contains("row 1"), "{message}");

    let missing = b"worker_id,country,earned,skills\nw1,US,10,python\n";
    let err = run_pipeline(missing, &PipelineConfig::default()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_INPUT);
    assert!(err.to_string().contains("wage"), "{err}");

    let header_only = b"worker_id,country,wage,earned,skills\n";
    assert!(matches!(
        run_pipeline(header_only, &PipelineConfig::default()),
        Err(PipelineError::NoProfiles)
    ));
}

#[test]
fn rejected_rows_can_be_allowed() {
    let mut csv = FIVE_WORKERS.as_bytes().to_vec();
    csv.extend_from_slice(b"bad,US,-5,0,python\n");
    assert!(matches!(
        run_pipeline(&csv, &PipelineConfig::default()),
        Err(PipelineError::Rejected { total: 1, .. })
    ));
    let cfg = PipelineConfig {
        allow_rejected_rows: true,
        min_subset_size: 1,
        feature_spec: skillcompass::econo::FeatureSpec {
            target_skills: vec![],
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    match run_pipeline(&csv, &cfg) {
        Ok(run) => assert_eq!(run.rejected.len(), 1),
        Err(err) => assert_eq!(err.exit_code(), EXIT_MODEL, "{err}"),
    }
}

#[test]
fn model_failures_use_the_model_exit_code() {
    let cfg = PipelineConfig {
        feature_spec: skillcompass::econo::FeatureSpec {
            target_skills: vec!["cobol".into()],
            ..Default::default()
        },
        ..PipelineConfig::default()
    };
    let err = run_pipeline(TWENTY_WORKERS.as_bytes(), &cfg).unwrap_err();
    assert_eq!(err.stage(), "fit");
    assert_eq!(err.exit_code(), EXIT_MODEL);
}

#[test]
fn regression_report_matches_golden() {
    let csv = synthetic_csv(1, 3000);
    let run = run_pipeline(&csv, &PipelineConfig::default()).unwrap();
    let text = render_regression(&run.artifact, false);
    assert!(text.contains("Constant"));
    assert!(text.contains("Reference levels: country US"));
    check_golden("regression.txt", &text);
}
