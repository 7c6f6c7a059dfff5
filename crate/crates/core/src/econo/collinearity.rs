//! Multicollinearity diagnostics: variance inflation factors and exact
//! linear dependencies.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::qr::HouseholderQr;
use super::AliasedSet;
use crate::util::lenient_f64;

pub const DEFAULT_VIF_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifEntry {
    pub column: String,
    /// `1 / (1 − R²_j)`; infinite for aliased columns, NaN for constant ones.
    #[serde(with = "lenient_f64")]
    pub vif: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearityReport {
    pub threshold: f64,
    pub rank: usize,
    pub columns: usize,
    pub vifs: Vec<VifEntry>,
    pub aliased: Vec<AliasedSet>,
}

impl CollinearityReport {
    pub fn flagged(&self) -> impl Iterator<Item = &VifEntry> {
        self.vifs.iter().filter(|v| v.flagged)
    }
}

/// VIF for every column except an intercept in column 0, each from the
/// auxiliary regression of that column on all the others.
pub fn detect_collinearity(
    x: &DMatrix<f64>,
    names: &[String],
    threshold: f64,
) -> CollinearityReport {
    let p = x.ncols();
    let qr = HouseholderQr::new(x);
    let aliased = qr
        .aliased()
        .iter()
        .map(|a| AliasedSet {
            column: names[a.column].clone(),
            depends_on: a.depends_on.iter().map(|&k| names[k].clone()).collect(),
        })
        .collect();

    let has_intercept = p > 0 && x.column(0).iter().all(|&v| v == 1.0);
    let start = usize::from(has_intercept);
    let vifs = (start..p)
        .map(|j| {
            let vif = auxiliary_vif(x, j, has_intercept);
            VifEntry {
                column: names[j].clone(),
                vif,
                flagged: vif.is_nan() || vif > threshold,
            }
        })
        .collect();

    CollinearityReport {
        threshold,
        rank: qr.rank(),
        columns: p,
        vifs,
        aliased,
    }
}

fn auxiliary_vif(x: &DMatrix<f64>, j: usize, centered: bool) -> f64 {
    let target: DVector<f64> = x.column(j).into_owned();
    let tss = if centered {
        let mean = target.mean();
        target.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        target.norm_squared()
    };
    if tss == 0.0 {
        return f64::NAN;
    }
    let others = x.clone().remove_column(j);
    if others.ncols() == 0 {
        return 1.0;
    }
    let qr = HouseholderQr::new(&others);
    let kept = others.select_columns(qr.kept());
    let beta = qr.solve(&target);
    let rss = (&target - kept * beta).norm_squared();
    if rss <= 1e-20 * tss {
        return f64::INFINITY;
    }
    tss / rss
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn orthogonal_columns_have_unit_vif() {
        // intercept plus two centered, mutually orthogonal columns
        let x =
            DMatrix::from_row_slice(4, 3, &[1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1.]);
        let report = detect_collinearity(&x, &names(3), DEFAULT_VIF_THRESHOLD);
        assert_eq!(report.vifs.len(), 2);
        for v in &report.vifs {
            assert!((v.vif - 1.0).abs() < 1e-12, "{v:?}");
            assert!(!v.flagged);
        }
        assert!(report.aliased.is_empty());
    }

    #[test]
    fn duplicated_column_is_reported() {
        let x = DMatrix::from_row_slice(
            5,
            3,
            &[1., 1., 1., 1., 2., 2., 1., 4., 4., 1., 3., 3., 1., 9., 9.],
        );
        let report = detect_collinearity(&x, &names(3), DEFAULT_VIF_THRESHOLD);
        assert_eq!(
            report.aliased,
            vec![AliasedSet {
                column: "c2".into(),
                depends_on: vec!["c1".into()]
            }]
        );
        assert_eq!(report.rank, 2);
        assert!(report.vifs.iter().all(|v| v.vif.is_infinite() && v.flagged));
    }

    #[test]
    fn constant_column_is_degenerate() {
        let x = DMatrix::from_row_slice(3, 3, &[1., 5., 1., 1., 5., 2., 1., 5., 4.]);
        let report = detect_collinearity(&x, &names(3), DEFAULT_VIF_THRESHOLD);
        assert!(report.vifs[0].vif.is_nan());
        assert!(report.vifs[0].flagged);
    }
}
