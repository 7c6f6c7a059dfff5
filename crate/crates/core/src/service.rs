//! Read-only HTTP query service over a loaded model.
//!
//! Endpoints: `GET /skills`, `GET /domains`, `GET /grid`, `POST /whatif`,
//! `POST /recommend`. Bodies are JSON. Every response is a pure function of
//! the model, which is shared immutably between request handlers.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::artifact::LoadedModel;
use crate::compass::{
    recommend, what_if, CompassError, ComplementarityGrid, Recommendation, WhatIf, CAVEAT,
};
use crate::econo::WageSummary;
use crate::profiles::normalize_skill;

/// Environment variable holding the bind address.
pub const BIND_ENV: &str = "SKILLCOMPASS_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// A rejected query, naming the offending skill when there is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryError {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skill: Option<String>,
    #[serde(skip)]
    pub client_error: bool,
}

impl std::fmt::Display for QueryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.error)
    }
}

impl std::error::Error for QueryError {}

impl From<CompassError> for QueryError {
    fn from(err: CompassError) -> Self {
        let (skill, client_error) = match &err {
            CompassError::SkillAlreadyHeld(s)
            | CompassError::UnknownSkill(s)
            | CompassError::NotInGrid(s) => (Some(s.clone()), true),
            CompassError::EmptyBundle | CompassError::UnknownDomain(_) => (None, true),
            CompassError::Fit { .. } => (None, false),
        };
        QueryError {
            error: err.to_string(),
            skill,
            client_error,
        }
    }
}

fn canonical(raw: &str) -> Result<String, QueryError> {
    normalize_skill(raw).map_err(|e| QueryError {
        error: e.to_string(),
        skill: Some(raw.to_string()),
        client_error: true,
    })
}

fn canonical_bundle(bundle: &[String]) -> Result<Vec<String>, QueryError> {
    bundle.iter().map(|s| canonical(s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub bundle: Vec<String>,
    pub candidate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendRequest {
    pub bundle: Vec<String>,
    #[serde(default)]
    pub top_n: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub domain: usize,
    pub domain_label: String,
    pub diversity: usize,
    pub recommendations: Vec<Recommendation>,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillEntry {
    pub key: String,
    pub display: String,
    pub domain: usize,
    pub domain_label: String,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainEntry {
    pub domain: usize,
    pub label: String,
    pub size: usize,
    pub top_skills: Vec<(String, usize)>,
    pub wages: Option<WageSummary>,
    pub wages_by_diversity: Vec<WageSummary>,
    pub excluded_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResponse {
    #[serde(flatten)]
    pub grid: ComplementarityGrid,
    pub domain_labels: Vec<String>,
    pub caveat: String,
}

/// What-if on raw skill names, as served by `/whatif` and printed by the
/// `whatif` command.
pub fn whatif_query(
    model: &LoadedModel,
    bundle: &[String],
    candidate: &str,
) -> Result<WhatIf, QueryError> {
    let bundle = canonical_bundle(bundle)?;
    let candidate = canonical(candidate)?;
    Ok(what_if(
        &bundle,
        &candidate,
        &model.artifact.grid,
        &model.domains,
    )?)
}

/// Recommendations on raw skill names, as served by `/recommend` and printed
/// by the `recommend` command.
pub fn recommend_query(
    model: &LoadedModel,
    bundle: &[String],
    top_n: usize,
    alpha: f64,
) -> Result<RecommendResponse, QueryError> {
    let bundle = canonical_bundle(bundle)?;
    let recommendations = recommend(&bundle, &model.artifact.grid, &model.domains, top_n, alpha)?;
    let domain = model
        .domains
        .dominant_domain(bundle.iter().map(String::as_str))
        .map_err(CompassError::from)?;
    let diversity = model
        .domains
        .diversity(bundle.iter().map(String::as_str))
        .map_err(CompassError::from)?;
    Ok(RecommendResponse {
        domain,
        domain_label: model.artifact.partition.label(domain).to_string(),
        diversity,
        recommendations,
        caveat: CAVEAT.to_string(),
    })
}

/// All skills by descending degree, ties by key.
pub fn skill_entries(model: &LoadedModel) -> Vec<SkillEntry> {
    let a = &model.artifact;
    let mut out: Vec<SkillEntry> = a
        .lexicon
        .keys()
        .iter()
        .enumerate()
        .map(|(id, key)| {
            let domain = model.domains.domain(key).expect("partition covers lexicon");
            SkillEntry {
                key: key.clone(),
                display: a.lexicon.display(id).to_string(),
                domain,
                domain_label: a.partition.label(domain).to_string(),
                degree: model.domains.degree(key).expect("partition covers lexicon"),
            }
        })
        .collect();
    out.sort_by(|x, y| y.degree.cmp(&x.degree).then_with(|| x.key.cmp(&y.key)));
    out
}

pub fn domain_entries(model: &LoadedModel) -> Vec<DomainEntry> {
    let a = &model.artifact;
    let sizes = a.partition.sizes();
    (0..a.partition.domain_count())
        .map(|d| DomainEntry {
            domain: d,
            label: a.partition.label(d).to_string(),
            size: sizes[d],
            top_skills: a.partition.top_skills(d).to_vec(),
            wages: a.wage_quartiles.iter().find(|w| w.domain == d).cloned(),
            wages_by_diversity: a
                .diversity_quartiles
                .iter()
                .filter(|w| w.domain == d)
                .cloned()
                .collect(),
            excluded_reason: a
                .grid
                .columns
                .iter()
                .find(|c| c.domain == d)
                .and_then(|c| c.excluded_reason.clone()),
        })
        .collect()
}

pub fn grid_response(model: &LoadedModel) -> GridResponse {
    GridResponse {
        grid: model.artifact.grid.clone(),
        domain_labels: model.artifact.partition.labels().to_vec(),
        caveat: CAVEAT.to_string(),
    }
}

impl IntoResponse for QueryError {
    fn into_response(self) -> Response {
        let status = if self.client_error {
            StatusCode::BAD_REQUEST
        } else {
            StatusCode::INTERNAL_SERVER_ERROR
        };
        (status, Json(self)).into_response()
    }
}

type Shared = Arc<LoadedModel>;

async fn skills(State(model): State<Shared>) -> Json<Vec<SkillEntry>> {
    Json(skill_entries(&model))
}

async fn domains(State(model): State<Shared>) -> Json<Vec<DomainEntry>> {
    Json(domain_entries(&model))
}

async fn grid(State(model): State<Shared>) -> Json<GridResponse> {
    Json(grid_response(&model))
}

async fn whatif(
    State(model): State<Shared>,
    Json(req): Json<WhatIfRequest>,
) -> Result<Json<WhatIf>, QueryError> {
    whatif_query(&model, &req.bundle, &req.candidate).map(Json)
}

async fn recommend_handler(
    State(model): State<Shared>,
    Json(req): Json<RecommendRequest>,
) -> Result<Json<RecommendResponse>, QueryError> {
    recommend_query(
        &model,
        &req.bundle,
        req.top_n.unwrap_or(DEFAULT_TOP_N),
        req.alpha.unwrap_or(DEFAULT_ALPHA),
    )
    .map(Json)
}

pub fn router(model: Arc<LoadedModel>) -> Router {
    Router::new()
        .route("/skills", get(skills))
        .route("/domains", get(domains))
        .route("/grid", get(grid))
        .route("/whatif", post(whatif))
        .route("/recommend", post(recommend_handler))
        .with_state(model)
}

/// Bind address from `explicit`, else the environment, else the default.
pub fn bind_address(explicit: Option<&str>) -> Result<SocketAddr, std::net::AddrParseError> {
    let from_env = std::env::var(BIND_ENV).ok();
    explicit
        .map(str::to_string)
        .or(from_env)
        .unwrap_or_else(|| DEFAULT_BIND.to_string())
        .parse()
}

/// Serves until the process receives Ctrl-C.
pub async fn serve(model: LoadedModel, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(model)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
