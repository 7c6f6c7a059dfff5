//! Wage regressions: feature engineering, OLS with inference,
//! multicollinearity diagnostics and descriptive wage statistics.

mod collinearity;
mod describe;
mod features;
mod ols;
pub mod qr;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use collinearity::{detect_collinearity, CollinearityReport, VifEntry, DEFAULT_VIF_THRESHOLD};
pub use describe::{
    median, percent_of_median, quantile, wage_quartiles, Grouping, WageSummary,
    DEFAULT_MIN_GROUP_SIZE,
};
pub use features::{
    build_design_matrix, diversity, diversity_level, diversity_level_name, dominant_domain,
    Baselines, ColumnKind, DesignMatrix, FeatureSpec, SkillDomains, DEFAULT_TARGET_SKILLS,
};
pub use ols::{fit_ols, stars, Coefficient, FTest, FitResult};
pub use report::{render_regression_text, render_regression_tsv, report_rows, ReportRow};

/// A column that is an exact linear combination of other columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasedSet {
    pub column: String,
    pub depends_on: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("skill set is empty")]
    EmptySkillSet,
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("{kind} baseline `{value}` does not occur in the data")]
    BaselineNotFound { kind: &'static str, value: String },
    #[error("invalid feature spec: {0}")]
    InvalidSpec(String),
    #[error("design is rank deficient: {}", describe_aliased(.0))]
    RankDeficient(Vec<AliasedSet>),
    #[error("{rows} observations cannot identify {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },
    #[error("dimension mismatch: X is {rows}x{cols}, y has {y}, {names} names")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        y: usize,
        names: usize,
    },
}

fn describe_aliased(sets: &[AliasedSet]) -> String {
    sets.iter()
        .map(|s| {
            if s.depends_on.is_empty() {
                format!("{} is all zero", s.column)
            } else {
                format!("{} ~ {}", s.column, s.depends_on.join(" + "))
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Fits a prepared design matrix.
pub fn fit_design(design: &DesignMatrix) -> Result<FitResult, EconError> {
    fit_ols(&design.x, &design.y, &design.names)
}
