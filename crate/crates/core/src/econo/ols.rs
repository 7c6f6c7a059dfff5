//! Ordinary least squares with classical inference.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::qr::HouseholderQr;
use super::{AliasedSet, EconError};
use crate::util::lenient_f64;

/// Significance stars: `***` p < 0.01, `**` p < 0.05, `*` p < 0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    #[serde(with = "lenient_f64")]
    pub t_value: f64,
    #[serde(with = "lenient_f64")]
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    #[serde(with = "lenient_f64")]
    pub value: f64,
    pub df1: usize,
    pub df2: usize,
    #[serde(with = "lenient_f64")]
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<Coefficient>,
    pub n_obs: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residual_std_error: f64,
    pub df_residual: usize,
    /// Joint test that all non-intercept coefficients are zero; absent for
    /// an intercept-only model.
    pub f_test: Option<FTest>,
    /// Residuals are not part of the serialized form.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn residual_sum_of_squares(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum()
    }
}

/// Fits `y ~ X` by Householder QR. Column 0 is treated as the intercept when
/// it is constant 1.
pub fn fit_ols(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
) -> Result<FitResult, EconError> {
    let (n, p) = x.shape();
    if y.len() != n || names.len() != p {
        return Err(EconError::DimensionMismatch {
            rows: n,
            cols: p,
            y: y.len(),
            names: names.len(),
        });
    }
    if n <= p {
        return Err(EconError::Underdetermined { rows: n, cols: p });
    }
    let qr = HouseholderQr::new(x);
    if !qr.aliased().is_empty() {
        return Err(EconError::RankDeficient(
            qr.aliased()
                .iter()
                .map(|a| AliasedSet {
                    column: names[a.column].clone(),
                    depends_on: a.depends_on.iter().map(|&k| names[k].clone()).collect(),
                })
                .collect(),
        ));
    }

    let beta = qr.solve(y);
    let fitted = x * &beta;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();

    let has_intercept = p > 0 && x.column(0).iter().all(|&v| v == 1.0);
    let tss = if has_intercept {
        let mean = y.mean();
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.norm_squared()
    };
    let df2 = n - p;
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let df_total = if has_intercept { n - 1 } else { n };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * df_total as f64 / df2 as f64;
    let sigma2 = rss / df2 as f64;

    let rinv = qr.r_inverse();
    let t_dist = StudentsT::new(0.0, 1.0, df2 as f64).expect("df2 > 0");
    let coefficients = (0..p)
        .map(|j| {
            let var = rinv.row(j).norm_squared() * sigma2;
            let se = var.sqrt();
            let t = beta[j] / se;
            let p_value = two_sided_p(&t_dist, t);
            Coefficient {
                name: names[j].clone(),
                estimate: beta[j],
                std_error: se,
                t_value: t,
                p_value,
                stars: stars(p_value).to_string(),
            }
        })
        .collect();

    let df1 = if has_intercept { p - 1 } else { p };
    let f_test = (df1 > 0).then(|| {
        let value = ((tss - rss) / df1 as f64) / sigma2;
        let p_value = if value.is_nan() {
            f64::NAN
        } else if value.is_infinite() {
            0.0
        } else {
            FisherSnedecor::new(df1 as f64, df2 as f64)
                .map(|d| d.sf(value.max(0.0)))
                .unwrap_or(f64::NAN)
        };
        FTest {
            value,
            df1,
            df2,
            p_value,
        }
    });

    Ok(FitResult {
        coefficients,
        n_obs: n,
        r_squared,
        adj_r_squared,
        residual_std_error: sigma2.sqrt(),
        df_residual: df2,
        f_test,
        residuals,
    })
}

fn two_sided_p(dist: &StudentsT, t: f64) -> f64 {
    if t.is_nan() {
        f64::NAN
    } else if t.is_infinite() {
        0.0
    } else {
        (2.0 * dist.sf(t.abs())).min(1.0)
    }
}
