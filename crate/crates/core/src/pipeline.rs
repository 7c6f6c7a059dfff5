//! End-to-end orchestration: profiles in, model artifact and reports out.
//!
//! Every stage error is tagged with the stage it came from, and each error
//! maps to a process exit code: 2 for input problems, 3 for model and
//! validation problems.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::artifact::{sha256_hex, ArtifactError, ModelArtifact, Provenance, FORMAT_VERSION};
use crate::compass::{
    build_grid, fit_full_sample, CompassError, ComplementarityGrid, DEFAULT_MIN_SUBSET_SIZE,
};
use crate::domains::{
    label_domains, louvain, render_centrality_table, DomainError, DomainPartition, LabelOverrides,
    LouvainConfig,
};
use crate::econo::{
    detect_collinearity, diversity_level_name, render_regression_text, render_regression_tsv,
    report_rows, wage_quartiles, Baselines, CollinearityReport, ColumnKind, DesignMatrix,
    EconError, FeatureSpec, FitResult, Grouping, ReportRow, SkillDomains, WageSummary,
    DEFAULT_MIN_GROUP_SIZE, DEFAULT_VIF_THRESHOLD,
};
use crate::profiles::{
    parse_profiles, ProfileError, ProfileSchema, RejectedRow, SkillLexicon, WorkerProfile,
};
use crate::skillnet::{EdgeListRecord, GraphError, SkillGraph};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub schema: ProfileSchema,
    /// Continue when some rows are rejected instead of failing the run.
    pub allow_rejected_rows: bool,
    pub seed: u64,
    pub resolution: f64,
    /// Number of top-degree skills kept per domain.
    pub label_top_k: usize,
    pub label_overrides: LabelOverrides,
    pub feature_spec: FeatureSpec,
    pub min_subset_size: usize,
    pub min_group_size: usize,
    pub vif_threshold: f64,
    /// Recorded in the provenance only when set.
    pub created_at: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            schema: ProfileSchema::default(),
            allow_rejected_rows: false,
            seed: 0,
            resolution: 1.0,
            label_top_k: 5,
            label_overrides: LabelOverrides::default(),
            feature_spec: FeatureSpec::default(),
            min_subset_size: DEFAULT_MIN_SUBSET_SIZE,
            min_group_size: DEFAULT_MIN_GROUP_SIZE,
            vif_threshold: DEFAULT_VIF_THRESHOLD,
            created_at: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("ingest: {0}")]
    Ingest(ProfileError),
    #[error("ingest: {} ({total} rows rejected)", .first.error)]
    Rejected { first: RejectedRow, total: usize },
    #[error("ingest: no valid worker profiles")]
    NoProfiles,
    #[error("graph: {0}")]
    Graph(GraphError),
    #[error("cluster: {0}")]
    Cluster(DomainError),
    #[error("fit: {0}")]
    Fit(CompassError),
    #[error("grid: {0}")]
    Grid(CompassError),
    #[error("describe: {0}")]
    Describe(EconError),
    #[error("artifact: {0}")]
    Artifact(ArtifactError),
    #[error("io: {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Ingest(_)
            | PipelineError::Rejected { .. }
            | PipelineError::NoProfiles => "ingest",
            PipelineError::Graph(_) => "graph",
            PipelineError::Cluster(_) => "cluster",
            PipelineError::Fit(_) => "fit",
            PipelineError::Grid(_) => "grid",
            PipelineError::Describe(_) => "describe",
            PipelineError::Artifact(_) => "artifact",
            PipelineError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Ingest(_)
            | PipelineError::Rejected { .. }
            | PipelineError::NoProfiles
            | PipelineError::Io { .. } => EXIT_INPUT,
            PipelineError::Artifact(ArtifactError::Io { .. }) => EXIT_INPUT,
            _ => EXIT_MODEL,
        }
    }
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses profile bytes, failing on the first rejected row unless the
/// config allows rejections.
pub fn ingest(
    input: &[u8],
    config: &PipelineConfig,
) -> Result<(Vec<WorkerProfile>, SkillLexicon, Vec<RejectedRow>), PipelineError> {
    let parsed = parse_profiles(input, &config.schema).map_err(PipelineError::Ingest)?;
    if !config.allow_rejected_rows {
        if let Some(first) = parsed.rejected.first() {
            return Err(PipelineError::Rejected {
                first: first.clone(),
                total: parsed.rejected.len(),
            });
        }
    }
    if parsed.profiles.is_empty() {
        return Err(PipelineError::NoProfiles);
    }
    Ok((parsed.profiles, parsed.lexicon, parsed.rejected))
}

/// Louvain partition with degree-based labels and overrides applied.
pub fn cluster(
    graph: &SkillGraph,
    lexicon: &SkillLexicon,
    config: &PipelineConfig,
) -> Result<DomainPartition, PipelineError> {
    let partition = louvain(
        graph,
        LouvainConfig {
            resolution: config.resolution,
            seed: config.seed,
        },
    )
    .map_err(PipelineError::Cluster)?;
    Ok(label_domains(
        graph,
        partition,
        lexicon,
        config.label_top_k,
        &config.label_overrides,
    ))
}

/// Everything computed from one population.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub profiles: Vec<WorkerProfile>,
    pub lexicon: SkillLexicon,
    pub graph: SkillGraph,
    pub partition: DomainPartition,
    pub domains: SkillDomains,
    pub design: DesignMatrix,
    pub full_fit: FitResult,
    pub grid: ComplementarityGrid,
    pub wage_quartiles: Vec<WageSummary>,
    pub diversity_quartiles: Vec<WageSummary>,
    pub collinearity: CollinearityReport,
}

/// Graph, domains, full-sample fit, grid and wage summaries.
pub fn analyze(
    profiles: Vec<WorkerProfile>,
    lexicon: SkillLexicon,
    config: &PipelineConfig,
) -> Result<Analysis, PipelineError> {
    let graph = SkillGraph::build(&profiles, &lexicon).map_err(PipelineError::Graph)?;
    let partition = cluster(&graph, &lexicon, config)?;
    let domains = SkillDomains::new(&graph, &partition);
    let (design, full_fit) =
        fit_full_sample(&profiles, &domains, &config.feature_spec).map_err(PipelineError::Fit)?;
    let grid = build_grid(
        &profiles,
        &domains,
        partition.labels(),
        &config.feature_spec,
        config.min_subset_size,
        &full_fit,
    )
    .map_err(PipelineError::Grid)?;
    let wage_quartiles =
        wage_quartiles(&profiles, &domains, Grouping::Domain, config.min_group_size)
            .map_err(PipelineError::Describe)?;
    let diversity_quartiles = wage_quartiles_by_diversity(&profiles, &domains, config)?;
    let collinearity = detect_collinearity(&design.x, &design.names, config.vif_threshold);
    Ok(Analysis {
        profiles,
        lexicon,
        graph,
        partition,
        domains,
        design,
        full_fit,
        grid,
        wage_quartiles,
        diversity_quartiles,
        collinearity,
    })
}

fn wage_quartiles_by_diversity(
    profiles: &[WorkerProfile],
    domains: &SkillDomains,
    config: &PipelineConfig,
) -> Result<Vec<WageSummary>, PipelineError> {
    wage_quartiles(
        profiles,
        domains,
        Grouping::DomainAndDiversity {
            cap: config.feature_spec.diversity_cap,
        },
        config.min_group_size,
    )
    .map_err(PipelineError::Describe)
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub artifact: ModelArtifact,
    pub analysis: Analysis,
    pub rejected: Vec<RejectedRow>,
}

/// Runs every stage on raw profile bytes. The result depends only on the
/// input bytes and the config.
pub fn run_pipeline(input: &[u8], config: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    let (profiles, lexicon, rejected) = ingest(input, config)?;
    let analysis = analyze(profiles, lexicon, config)?;
    let provenance = Provenance {
        input_sha256: sha256_hex(input),
        input_bytes: input.len(),
        workers: analysis.profiles.len(),
        rejected_rows: rejected.len(),
        seed: config.seed,
        resolution: config.resolution,
        min_subset_size: config.min_subset_size,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created_at: config.created_at.clone(),
    };
    let artifact = ModelArtifact {
        format_version: FORMAT_VERSION,
        provenance,
        lexicon: analysis.lexicon.clone(),
        graph: EdgeListRecord::from(&analysis.graph),
        partition: analysis.partition.clone(),
        feature_spec: config.feature_spec.clone(),
        baselines: analysis.design.baselines.clone(),
        columns: analysis.design.columns.clone(),
        full_fit: analysis.full_fit.clone(),
        grid: analysis.grid.clone(),
        wage_quartiles: analysis.wage_quartiles.clone(),
        diversity_quartiles: analysis.diversity_quartiles.clone(),
    };
    artifact.validate().map_err(PipelineError::Artifact)?;
    Ok(PipelineRun {
        artifact,
        analysis,
        rejected,
    })
}

pub const ARTIFACT_FILE: &str = "model.json";

/// Writes the artifact and all reports into `dir`, returning the paths
/// written.
pub fn write_outputs(run: &PipelineRun, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| PipelineError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let artifact = &run.artifact;
    let mut written = Vec::new();
    let model_path = dir.join(ARTIFACT_FILE);
    artifact
        .write(&model_path)
        .map_err(PipelineError::Artifact)?;
    written.push(model_path);

    let mut edges = Vec::new();
    let mut partition = Vec::new();
    let mut grid = Vec::new();
    run.analysis
        .graph
        .write_edge_list(&mut edges)
        .map_err(io(dir))?;
    artifact
        .partition
        .write_tsv(&mut partition)
        .map_err(io(dir))?;
    artifact.grid.write_tsv(&mut grid).map_err(io(dir))?;
    let files: Vec<(&str, Vec<u8>)> = vec![
        ("edges.tsv", edges),
        ("partition.tsv", partition),
        ("centrality.txt", render_centrality(artifact).into_bytes()),
        (
            "regression.txt",
            render_regression(artifact, false).into_bytes(),
        ),
        (
            "regression.tsv",
            render_regression_table(artifact, true).into_bytes(),
        ),
        ("grid.txt", render_grid(artifact).into_bytes()),
        ("grid.tsv", grid),
        ("wages.tsv", render_wage_quartiles(artifact).into_bytes()),
        (
            "collinearity.txt",
            render_collinearity(&run.analysis.collinearity).into_bytes(),
        ),
    ];
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Names used to label report rows.
#[derive(Debug, Clone, Copy)]
pub struct LabelContext<'a> {
    pub lexicon: &'a SkillLexicon,
    pub partition: &'a DomainPartition,
    pub spec: &'a FeatureSpec,
}

impl<'a> LabelContext<'a> {
    pub fn of(artifact: &'a ModelArtifact) -> Self {
        LabelContext {
            lexicon: &artifact.lexicon,
            partition: &artifact.partition,
            spec: &artifact.feature_spec,
        }
    }

    /// Human-readable label of a design column.
    pub fn column_label(&self, kind: &ColumnKind) -> String {
        match kind {
            ColumnKind::Intercept => "Constant".into(),
            ColumnKind::Country(c) => format!("Country: {c}"),
            ColumnKind::LogEarned => format!("log(earned + {})", self.spec.log_offset),
            ColumnKind::Diversity(l) => diversity_label(*l, self.spec.diversity_cap),
            ColumnKind::Domain(d) => format!("Domain: {}", self.partition.label(*d)),
            ColumnKind::Skill(s) => self.lexicon.display_of(s).unwrap_or(s).to_string(),
        }
    }

    pub fn rows(&self, fit: &FitResult, columns: &[ColumnKind]) -> Vec<ReportRow> {
        report_rows(fit, columns, &|k| self.column_label(k))
    }

    /// Regression table with reference levels spelled out below it.
    pub fn render_regression(
        &self,
        fit: &FitResult,
        columns: &[ColumnKind],
        baselines: &Baselines,
        full: bool,
    ) -> String {
        let mut reference = format!(
            "Reference levels: country {}; {}",
            baselines.country,
            diversity_label(baselines.diversity, self.spec.diversity_cap).to_lowercase()
        );
        if let Some(d) = baselines.domain {
            let _ = write!(reference, "; domain {}", self.partition.label(d));
        }
        let response = if self.spec.log_wage {
            "log(asking wage)"
        } else {
            "asking wage (USD/h)"
        };
        render_regression_text(fit, &self.rows(fit, columns), full, response, &[reference])
    }
}

fn diversity_label(level: usize, cap: usize) -> String {
    let name = diversity_level_name(level, cap);
    if level == 1 {
        "Diversity: 1 domain".into()
    } else {
        format!("Diversity: {name} domains")
    }
}

pub fn regression_rows(artifact: &ModelArtifact) -> Vec<ReportRow> {
    LabelContext::of(artifact).rows(&artifact.full_fit, &artifact.columns)
}

pub fn render_regression(artifact: &ModelArtifact, full: bool) -> String {
    LabelContext::of(artifact).render_regression(
        &artifact.full_fit,
        &artifact.columns,
        &artifact.baselines,
        full,
    )
}

pub fn render_regression_table(artifact: &ModelArtifact, full: bool) -> String {
    render_regression_tsv(&regression_rows(artifact), full)
}

pub fn render_centrality(artifact: &ModelArtifact) -> String {
    render_centrality_table(&artifact.partition, &artifact.lexicon)
}

pub fn render_grid(artifact: &ModelArtifact) -> String {
    artifact
        .grid
        .render_text(&|s| artifact.lexicon.display_of(s).unwrap_or(s).to_string())
}

/// `domain, label, diversity, n, min, q1, median, q3, max, low_n` rows for
/// both groupings; `diversity` is empty for the per-domain rows.
pub fn render_wage_quartiles(artifact: &ModelArtifact) -> String {
    let cap = artifact.feature_spec.diversity_cap;
    let mut out = String::from("domain\tlabel\tdiversity\tn\tmin\tq1\tmedian\tq3\tmax\tlow_n\n");
    for w in artifact
        .wage_quartiles
        .iter()
        .chain(&artifact.diversity_quartiles)
    {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            w.domain,
            artifact.partition.label(w.domain),
            w.diversity
                .map(|l| diversity_level_name(l, cap))
                .unwrap_or_default(),
            w.n,
            w.min,
            w.q1,
            w.median,
            w.q3,
            w.max,
            w.low_n
        );
    }
    out
}

pub fn render_collinearity(report: &CollinearityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Design rank {} of {} columns; VIF threshold {}",
        report.rank, report.columns, report.threshold
    );
    for set in &report.aliased {
        let _ = writeln!(
            out,
            "aliased: {} ~ {}",
            set.column,
            set.depends_on.join(" + ")
        );
    }
    let _ = writeln!(out, "{:<32}{:>12}", "column", "VIF");
    for v in &report.vifs {
        let _ = writeln!(
            out,
            "{:<32}{:>12.3}{}",
            v.column,
            v.vif,
            if v.flagged { "  flagged" } else { "" }
        );
    }
    out
}
