//! Regression tables in aligned-text and tab-separated form.

use std::fmt::Write as _;

use super::features::ColumnKind;
use super::ols::{stars, Coefficient, FitResult};
use crate::profiles::group_thousands;

const RULE_WIDTH: usize = 70;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub kind: ColumnKind,
    pub label: String,
    pub coefficient: Coefficient,
}

fn display_rank(kind: &ColumnKind) -> u8 {
    match kind {
        ColumnKind::Skill(_) => 0,
        ColumnKind::Domain(_) => 1,
        ColumnKind::LogEarned => 2,
        ColumnKind::Diversity(_) => 3,
        ColumnKind::Country(_) => 4,
        ColumnKind::Intercept => 5,
    }
}

/// Pairs coefficients with their column kinds and display labels, ordered
/// skills, domains, earnings, diversity, countries, constant.
pub fn report_rows(
    fit: &FitResult,
    columns: &[ColumnKind],
    label: &dyn Fn(&ColumnKind) -> String,
) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = columns
        .iter()
        .zip(&fit.coefficients)
        .map(|(kind, c)| ReportRow {
            kind: kind.clone(),
            label: label(kind),
            coefficient: c.clone(),
        })
        .collect();
    rows.sort_by_key(|r| display_rank(&r.kind));
    rows
}

fn visible(row: &ReportRow, full: bool) -> bool {
    full || !matches!(row.kind, ColumnKind::Country(_))
}

/// Aligned text table. Country dummies are listed only when `full`.
pub fn render_regression_text(
    fit: &FitResult,
    rows: &[ReportRow],
    full: bool,
    response: &str,
    notes: &[String],
) -> String {
    let mut out = String::new();
    let heavy = "=".repeat(RULE_WIDTH);
    let light = "-".repeat(RULE_WIDTH);
    let _ = writeln!(out, "{:>44}", format!("Dependent variable: {response}"));
    let _ = writeln!(out, "{heavy}");
    for row in rows.iter().filter(|r| visible(r, full)) {
        let c = &row.coefficient;
        let _ = writeln!(
            out,
            "{:<32}{:>16}{:<4}{:>14}",
            row.label,
            format!("{:.3}", c.estimate),
            c.stars,
            format!("({:.3})", c.std_error)
        );
    }
    let _ = writeln!(out, "{light}");
    let _ = writeln!(
        out,
        "{:<32}{:>16}",
        "Observations",
        group_thousands(fit.n_obs)
    );
    let _ = writeln!(out, "{:<32}{:>16.3}", "R²", fit.r_squared);
    let _ = writeln!(out, "{:<32}{:>16.3}", "Adjusted R²", fit.adj_r_squared);
    let _ = writeln!(
        out,
        "{:<32}{:>16.3} (df = {})",
        "Residual Std. Error", fit.residual_std_error, fit.df_residual
    );
    if let Some(f) = &fit.f_test {
        let _ = writeln!(
            out,
            "{:<32}{:>16}{:<4}(df = {}; {})",
            "F Statistic",
            format!("{:.3}", f.value),
            stars(f.p_value),
            f.df1,
            f.df2
        );
    }
    let _ = writeln!(out, "{heavy}");
    let _ = write!(out, "Note: *p<0.1; **p<0.05; ***p<0.01");
    if !full
        && rows
            .iter()
            .any(|r| matches!(r.kind, ColumnKind::Country(_)))
    {
        let _ = write!(out, "; country dummies not shown");
    }
    let _ = writeln!(out);
    for note in notes {
        let _ = writeln!(out, "{note}");
    }
    out
}

/// `column<TAB>beta<TAB>se<TAB>t<TAB>p<TAB>stars` with a header line; floats
/// in shortest round-trip form.
pub fn render_regression_tsv(rows: &[ReportRow], full: bool) -> String {
    let mut out = String::from("column\tbeta\tse\tt\tp\tstars\n");
    for row in rows.iter().filter(|r| visible(r, full)) {
        let c = &row.coefficient;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.name, c.estimate, c.std_error, c.t_value, c.p_value, c.stars
        );
    }
    out
}
