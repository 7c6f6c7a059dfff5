use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use skillcompass::artifact::{LoadedModel, ModelArtifact};
use skillcompass::domains::LabelOverrides;
use skillcompass::econo::FeatureSpec;
use skillcompass::pipeline::{
    self, analyze, ingest, read_input, render_collinearity, LabelContext, PipelineConfig,
    PipelineError, EXIT_INPUT, EXIT_MODEL,
};
use skillcompass::profiles::{validate_population, write_profiles, ProfileSchema};
use skillcompass::service::{self, recommend_query, whatif_query, DEFAULT_ALPHA, DEFAULT_TOP_N};
use skillcompass::skillnet::{top_k_by_degree, SkillGraph};
use skillcompass::synth::{generate_population, SynthConfig};

#[derive(Parser)]
#[command(
    name = "skillcompass",
    version,
    about = "Skill networks, skill domains and wage complementarity from worker profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a profile table.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Write the accepted profiles as canonical CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the skill co-occurrence graph and export its edge list.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        /// Edge list destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the highest-degree skills.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Partition the skill graph into domains.
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        /// Partition table destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the full-sample wage regression.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Show country dummies.
        #[arg(long)]
        full: bool,
        /// Print the machine-readable table instead of aligned text.
        #[arg(long)]
        tsv: bool,
        /// Append variance inflation factors.
        #[arg(long)]
        vif: bool,
    },
    /// Fit the per-domain regressions and print the complementarity grid.
    Grid {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tsv: bool,
    },
    /// Estimated wage change from adding one skill to a bundle.
    Whatif {
        #[arg(long)]
        artifact: PathBuf,
        /// Held skills, `|`-separated or repeated.
        #[arg(long, required = true)]
        bundle: Vec<String>,
        #[arg(long)]
        candidate: String,
    },
    /// Ranked significant skill additions for a bundle.
    Recommend {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long, required = true)]
        bundle: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_TOP_N)]
        top_n: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Generate a synthetic population with planted domains and effects.
    Simulate {
        /// Directory receiving profiles.csv and truth.json.
        #[arg(long)]
        out_dir: PathBuf,
        /// JSON generator config; defaults to the built-in scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every stage and write the model artifact plus reports.
    Pipeline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// Timestamp recorded in the artifact provenance.
        #[arg(long)]
        created_at: Option<String>,
    },
    /// Serve the query endpoints for an artifact.
    Serve {
        #[arg(long)]
        artifact: PathBuf,
        /// Overrides the SKILLCOMPASS_BIND environment variable.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Render reports from an artifact.
    Report {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportKind::All)]
        kind: ReportKind,
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ReportKind {
    All,
    Summary,
    Centrality,
    Regression,
    Grid,
    Wages,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    profiles: PathBuf,
    /// Separator between skills inside the skills cell.
    #[arg(long, default_value_t = '|')]
    skill_separator: char,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip invalid rows instead of failing.
    #[arg(long)]
    allow_rejected: bool,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domain label overrides: `selector<TAB>label` lines.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Top-degree skills kept per domain.
    #[arg(long, default_value_t = 5)]
    top_k: usize,
}

#[derive(Args)]
struct ModelArgs {
    /// Target skills, comma-separated; defaults to 14 programming languages.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<String>>,
    #[arg(long, default_value_t = skillcompass::compass::DEFAULT_MIN_SUBSET_SIZE)]
    min_subset: usize,
    #[arg(long)]
    country_baseline: Option<String>,
    #[arg(long)]
    diversity_baseline: Option<usize>,
    #[arg(long)]
    domain_baseline: Option<usize>,
    /// Regress log wage instead of wage.
    #[arg(long)]
    log_wage: bool,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<PipelineError> for Failure {
    fn from(err: PipelineError) -> Self {
        Failure {
            code: err.exit_code() as u8,
            error: err.into(),
        }
    }
}

trait Classify<T> {
    fn input_err(self) -> Result<T, Failure>;
    fn model_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_INPUT as u8,
            error: e.into(),
        })
    }

    fn model_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: EXIT_MODEL as u8,
            error: e.into(),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn config_from(
    input: &InputArgs,
    cluster: Option<&ClusterArgs>,
    model: Option<&ModelArgs>,
) -> Result<PipelineConfig, Failure> {
    let delimiter = u8::try_from(input.delimiter)
        .map_err(|_| anyhow!("delimiter must be a single-byte character"))
        .input_err()?;
    let mut config = PipelineConfig {
        schema: ProfileSchema {
            skill_separator: input.skill_separator,
            delimiter,
            ..ProfileSchema::default()
        },
        allow_rejected_rows: input.allow_rejected,
        ..PipelineConfig::default()
    };
    if let Some(c) = cluster {
        config.resolution = c.resolution;
        config.seed = c.seed;
        config.label_top_k = c.top_k;
        if let Some(path) = &c.labels {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .input_err()?;
            config.label_overrides = LabelOverrides::parse(&text).input_err()?;
        }
    }
    if let Some(m) = model {
        let mut spec = FeatureSpec {
            country_baseline: m.country_baseline.clone().map(|c| c.trim().to_uppercase()),
            diversity_baseline: m.diversity_baseline,
            domain_baseline: m.domain_baseline,
            log_wage: m.log_wage,
            ..FeatureSpec::default()
        };
        if let Some(targets) = &m.targets {
            spec.target_skills = targets
                .iter()
                .map(|t| skillcompass::profiles::normalize_skill(t))
                .collect::<Result<_, _>>()
                .input_err()?;
        }
        config.feature_spec = spec;
        config.min_subset_size = m.min_subset;
    }
    Ok(config)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)
            .with_context(|| format!("writing {}", path.display()))
            .input_err(),
        None => std::io::stdout().write_all(bytes).input_err(),
    }
}

fn split_bundle(raw: &[String]) -> Vec<String> {
    raw.iter()
        .flat_map(|s| s.split('|'))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn load_model(path: &Path) -> Result<LoadedModel, Failure> {
    use skillcompass::artifact::ArtifactError;
    LoadedModel::load(path).map_err(|e| Failure {
        code: if matches!(e, ArtifactError::Io { .. }) {
            EXIT_INPUT as u8
        } else {
            EXIT_MODEL as u8
        },
        error: anyhow::Error::new(e).context(format!("loading {}", path.display())),
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).model_err()?;
    println!("{text}");
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest { input, out } => {
            let config = config_from(&input, None, None)?;
            let bytes = read_input(&input.profiles)?;
            let parsed = skillcompass::profiles::parse_profiles(bytes.as_slice(), &config.schema)
                .map_err(PipelineError::Ingest)?;
            for r in &parsed.rejected {
                eprintln!("rejected {}", r.error);
            }
            let summary = validate_population(&parsed.profiles).model_err()?;
            println!("{summary}");
            if let Some(path) = out {
                let file = fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))
                    .input_err()?;
                write_profiles(file, &parsed.profiles).input_err()?;
            }
            if !parsed.rejected.is_empty() && !input.allow_rejected {
                return Err(Failure {
                    code: EXIT_INPUT as u8,
                    error: anyhow!("ingest: {} rows rejected", parsed.rejected.len()),
                });
            }
        }
        Command::Graph { input, out, top } => {
            let config = config_from(&input, None, None)?;
            let (profiles, lexicon, _) = ingest(&read_input(&input.profiles)?, &config)?;
            let graph = SkillGraph::build(&profiles, &lexicon).map_err(PipelineError::Graph)?;
            let mut edges = Vec::new();
            graph.write_edge_list(&mut edges).input_err()?;
            emit(out.as_deref(), &edges)?;
            eprintln!(
                "{} skills, {} edges, total weight {}",
                graph.node_count(),
                graph.edge_count(),
                graph.total_edge_weight()
            );
            for (key, degree) in
                top_k_by_degree(&graph, lexicon.keys().iter().map(String::as_str), top)
            {
                eprintln!("{degree:>6}  {}", lexicon.display_of(&key).unwrap_or(&key));
            }
        }
        Command::Cluster {
            input,
            cluster,
            out,
        } => {
            let config = config_from(&input, Some(&cluster), None)?;
            let (profiles, lexicon, _) = ingest(&read_input(&input.profiles)?, &config)?;
            let graph = SkillGraph::build(&profiles, &lexicon).map_err(PipelineError::Graph)?;
            let partition = pipeline::cluster(&graph, &lexicon, &config)?;
            print!(
                "{}",
                skillcompass::domains::render_centrality_table(&partition, &lexicon)
            );
            println!(
                "{} domains, modularity {:.6}",
                partition.domain_count(),
                partition.modularity()
            );
            if let Some(path) = out {
                let mut buf = Vec::new();
                partition.write_tsv(&mut buf).input_err()?;
                emit(Some(&path), &buf)?;
            }
        }
        Command::Fit {
            input,
            cluster,
            model,
            full,
            tsv,
            vif,
        } => {
            let config = config_from(&input, Some(&cluster), Some(&model))?;
            let (profiles, lexicon, _) = ingest(&read_input(&input.profiles)?, &config)?;
            let graph = SkillGraph::build(&profiles, &lexicon).map_err(PipelineError::Graph)?;
            let partition = pipeline::cluster(&graph, &lexicon, &config)?;
            let domains = skillcompass::econo::SkillDomains::new(&graph, &partition);
            let (design, fit) =
                skillcompass::compass::fit_full_sample(&profiles, &domains, &config.feature_spec)
                    .map_err(PipelineError::Fit)?;
            let labels = LabelContext {
                lexicon: &lexicon,
                partition: &partition,
                spec: &config.feature_spec,
            };
            if tsv {
                let rows = labels.rows(&fit, &design.columns);
                print!(
                    "{}",
                    skillcompass::econo::render_regression_tsv(&rows, full)
                );
            } else {
                print!(
                    "{}",
                    labels.render_regression(&fit, &design.columns, &design.baselines, full)
                );
            }
            if vif {
                let report = skillcompass::econo::detect_collinearity(
                    &design.x,
                    &design.names,
                    config.vif_threshold,
                );
                print!("{}", render_collinearity(&report));
            }
        }
        Command::Grid {
            input,
            cluster,
            model,
            tsv,
        } => {
            let config = config_from(&input, Some(&cluster), Some(&model))?;
            let (profiles, lexicon, _) = ingest(&read_input(&input.profiles)?, &config)?;
            let analysis = analyze(profiles, lexicon, &config)?;
            if tsv {
                let mut buf = Vec::new();
                analysis.grid.write_tsv(&mut buf).input_err()?;
                emit(None, &buf)?;
            } else {
                let lex = &analysis.lexicon;
                print!(
                    "{}",
                    analysis
                        .grid
                        .render_text(&|s| lex.display_of(s).unwrap_or(s).to_string())
                );
            }
        }
        Command::Whatif {
            artifact,
            bundle,
            candidate,
        } => {
            let model = load_model(&artifact)?;
            let answer = whatif_query(&model, &split_bundle(&bundle), &candidate).input_err()?;
            print_json(&answer)?;
        }
        Command::Recommend {
            artifact,
            bundle,
            top_n,
            alpha,
        } => {
            let model = load_model(&artifact)?;
            let answer =
                recommend_query(&model, &split_bundle(&bundle), top_n, alpha).input_err()?;
            print_json(&answer)?;
        }
        Command::Simulate {
            out_dir,
            config,
            seed,
            workers,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))
                        .input_err()?;
                    serde_json::from_str(&text).input_err()?
                }
                None => SynthConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = workers {
                cfg.n_workers = n;
            }
            let population = generate_population(&cfg).input_err()?;
            fs::create_dir_all(&out_dir).input_err()?;
            let csv_path = out_dir.join("profiles.csv");
            let file = fs::File::create(&csv_path)
                .with_context(|| format!("creating {}", csv_path.display()))
                .input_err()?;
            write_profiles(file, &population.profiles).input_err()?;
            let truth = serde_json::to_vec_pretty(&population.truth).model_err()?;
            fs::write(out_dir.join("truth.json"), truth).input_err()?;
            println!(
                "wrote {} workers to {}",
                population.profiles.len(),
                csv_path.display()
            );
        }
        Command::Pipeline {
            input,
            cluster,
            model,
            out_dir,
            created_at,
        } => {
            let mut config = config_from(&input, Some(&cluster), Some(&model))?;
            config.created_at = created_at;
            let run = pipeline::run_pipeline(&read_input(&input.profiles)?, &config)?;
            for r in &run.rejected {
                eprintln!("rejected {}", r.error);
            }
            for path in pipeline::write_outputs(&run, &out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Serve { artifact, bind } => {
            let model = load_model(&artifact)?;
            let addr = service::bind_address(bind.as_deref()).input_err()?;
            let runtime = tokio::runtime::Runtime::new().model_err()?;
            eprintln!("serving {} on http://{addr}", artifact.display());
            runtime.block_on(service::serve(model, addr)).input_err()?;
        }
        Command::Report {
            artifact,
            kind,
            full,
        } => {
            let model = load_model(&artifact)?;
            print!("{}", render_report(&model.artifact, kind, full));
        }
    }
    Ok(())
}

fn render_report(a: &ModelArtifact, kind: ReportKind, full: bool) -> String {
    let summary = || {
        format!(
            "{} workers, {} skills, {} domains, modularity {:.6}\ninput sha256 {}\n",
            a.provenance.workers,
            a.lexicon.len(),
            a.partition.domain_count(),
            a.partition.modularity(),
            a.provenance.input_sha256
        )
    };
    match kind {
        ReportKind::Summary => summary(),
        ReportKind::Centrality => pipeline::render_centrality(a),
        ReportKind::Regression => pipeline::render_regression(a, full),
        ReportKind::Grid => pipeline::render_grid(a),
        ReportKind::Wages => pipeline::render_wage_quartiles(a),
        ReportKind::All => [
            summary(),
            pipeline::render_centrality(a),
            pipeline::render_regression(a, full),
            pipeline::render_grid(a),
        ]
        .join("\n"),
    }
}
