//! The self-contained model file written by the pipeline and read by the
//! query commands and the service.
//!
//! The file is a JSON envelope `{"checksum": ..., "model": {...}}` where the
//! checksum is the SHA-256 of the serialized model. Loading verifies the
//! checksum and the internal consistency of the model.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compass::ComplementarityGrid;
use crate::domains::DomainPartition;
use crate::econo::{Baselines, ColumnKind, FeatureSpec, FitResult, SkillDomains, WageSummary};
use crate::profiles::SkillLexicon;
use crate::skillnet::{EdgeListRecord, SkillGraph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed artifact: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported artifact format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("checksum mismatch: recorded {recorded}, computed {computed}")]
    Checksum { recorded: String, computed: String },
    #[error("inconsistent artifact: {0}")]
    Inconsistent(String),
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the raw input bytes.
    pub input_sha256: String,
    pub input_bytes: usize,
    pub workers: usize,
    pub rejected_rows: usize,
    pub seed: u64,
    pub resolution: f64,
    pub min_subset_size: usize,
    pub tool_version: String,
    /// Only present when explicitly supplied, so that reruns stay
    /// byte-identical by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub provenance: Provenance,
    pub lexicon: SkillLexicon,
    pub graph: EdgeListRecord,
    pub partition: DomainPartition,
    pub feature_spec: FeatureSpec,
    pub baselines: Baselines,
    /// Design columns of the full-sample fit, aligned with its coefficients.
    pub columns: Vec<ColumnKind>,
    pub full_fit: FitResult,
    pub grid: ComplementarityGrid,
    /// Wage summaries per dominant domain.
    pub wage_quartiles: Vec<WageSummary>,
    /// Wage summaries per dominant domain and diversity level.
    pub diversity_quartiles: Vec<WageSummary>,
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    checksum: String,
    model: &'a ModelArtifact,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    checksum: String,
    model: ModelArtifact,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ModelArtifact {
    pub fn checksum(&self) -> Result<String, ArtifactError> {
        Ok(sha256_hex(&serde_json::to_vec(self)?))
    }

    /// Serialized envelope, pretty-printed with a trailing newline.
    pub fn to_bytes(&self) -> Result<Vec<u8>, ArtifactError> {
        let envelope = EnvelopeOut {
            checksum: self.checksum()?,
            model: self,
        };
        let mut bytes = serde_json::to_vec_pretty(&envelope)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ArtifactError> {
        let envelope: EnvelopeIn = serde_json::from_slice(bytes)?;
        let mut model = envelope.model;
        if model.format_version != FORMAT_VERSION {
            return Err(ArtifactError::Version {
                found: model.format_version,
            });
        }
        model.lexicon.rebuild_index();
        let computed = model.checksum()?;
        if computed != envelope.checksum {
            return Err(ArtifactError::Checksum {
                recorded: envelope.checksum,
                computed,
            });
        }
        model.validate()?;
        Ok(model)
    }

    pub fn write(&self, path: &Path) -> Result<(), ArtifactError> {
        fs::write(path, self.to_bytes()?).map_err(|source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        let bytes = fs::read(path).map_err(|source| ArtifactError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Rebuilds the skill graph from the stored edge list.
    pub fn skill_graph(&self) -> Result<SkillGraph, ArtifactError> {
        SkillGraph::try_from(self.graph.clone())
            .map_err(|e| ArtifactError::Inconsistent(e.to_string()))
    }

    /// Internal consistency: the graph and partition cover exactly the
    /// lexicon, the stored modularity matches a recomputation, and the grid's
    /// full-sample column equals the embedded full-sample fit bit for bit.
    pub fn validate(&self) -> Result<(), ArtifactError> {
        let bad = |msg: String| Err(ArtifactError::Inconsistent(msg));
        if self.graph.keys != self.lexicon.keys() {
            return bad("graph nodes differ from the lexicon".into());
        }
        let graph = self.skill_graph()?;
        if let Err(msg) = self.partition.check_against(&graph) {
            return bad(format!("partition: {msg}"));
        }
        if self.columns.len() != self.full_fit.coefficients.len() {
            return bad("design columns do not match the fit".into());
        }
        let cap = self.feature_spec.diversity_cap;
        for (kind, c) in self.columns.iter().zip(&self.full_fit.coefficients) {
            if kind.name(cap) != c.name {
                return bad(format!(
                    "column {} does not match coefficient {}",
                    kind.name(cap),
                    c.name
                ));
            }
        }
        if self.grid.target_skills != self.feature_spec.target_skills {
            return bad("grid target skills differ from the feature spec".into());
        }
        for skill in &self.grid.target_skills {
            let cell = self.grid.cell(skill, None).ok_or_else(|| {
                ArtifactError::Inconsistent(format!("grid lacks ALL cell for {skill}"))
            })?;
            let coef = self
                .full_fit
                .coefficient(&ColumnKind::Skill(skill.clone()).name(cap))
                .ok_or_else(|| ArtifactError::Inconsistent(format!("fit lacks skill {skill}")))?;
            let same = |a: Option<f64>, b: f64| a.is_some_and(|a| a.to_bits() == b.to_bits());
            if !same(cell.beta, coef.estimate)
                || !same(cell.se, coef.std_error)
                || !same(cell.p, coef.p_value)
                || cell.n != self.full_fit.n_obs
            {
                return bad(format!(
                    "ALL cell for {skill} differs from the full-sample fit"
                ));
            }
        }
        if self.grid.columns.len() != self.partition.domain_count() {
            return bad("grid columns differ from the domain count".into());
        }
        Ok(())
    }
}

/// An artifact together with the lookup structures queries need.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub artifact: ModelArtifact,
    pub graph: SkillGraph,
    pub domains: SkillDomains,
}

impl LoadedModel {
    pub fn new(artifact: ModelArtifact) -> Result<Self, ArtifactError> {
        let graph = artifact.skill_graph()?;
        let domains = SkillDomains::new(&graph, &artifact.partition);
        Ok(LoadedModel {
            artifact,
            graph,
            domains,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ArtifactError> {
        Self::new(ModelArtifact::load(path)?)
    }
}
