//! Worker profile ingestion: parsing delimited files into a validated
//! population and the skill lexicon that names its vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Country code assigned to rows whose country cell is empty.
pub const UNKNOWN_COUNTRY: &str = "UNKNOWN";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("skill name is empty after normalization")]
    EmptySkill,
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: field `{field}` is not a number: {value:?}")]
    MalformedNumber {
        row: usize,
        field: String,
        value: String,
    },
    #[error("row {row}: skill list is empty")]
    EmptySkillList { row: usize },
    #[error("row {row}: wage must be positive, got {value}")]
    NonPositiveWage { row: usize, value: f64 },
    #[error("row {row}: earned must be non-negative, got {value}")]
    NegativeEarned { row: usize, value: f64 },
    #[error("row {row}: worker id is empty")]
    EmptyWorkerId { row: usize },
    #[error("row {row}: duplicate worker id `{id}`")]
    DuplicateWorkerId { row: usize, id: String },
    #[error("invariant violation for workers: {}", .0.join(", "))]
    InvariantViolation(Vec<String>),
    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for ProfileError {
    fn from(err: csv::Error) -> Self {
        ProfileError::Csv(err.to_string())
    }
}

/// Canonical skill key: trimmed, internal whitespace collapsed, case-folded.
pub fn normalize_skill(raw: &str) -> Result<String, ProfileError> {
    let key = collapse_whitespace(raw).to_lowercase();
    if key.is_empty() {
        Err(ProfileError::EmptySkill)
    } else {
        Ok(key)
    }
}

fn collapse_whitespace(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: String,
    pub country: String,
    /// Asking wage in USD per hour.
    pub wage: f64,
    /// Lifetime platform earnings in USD.
    pub earned: f64,
    pub skills: BTreeSet<String>,
}

impl WorkerProfile {
    fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.wage > 0.0 && self.wage.is_finite()) {
            out.push("wage must be positive");
        }
        if !(self.earned >= 0.0 && self.earned.is_finite()) {
            out.push("earned must be non-negative");
        }
        if self.skills.is_empty() {
            out.push("skill set is empty");
        }
        if self
            .skills
            .iter()
            .any(|s| normalize_skill(s).map_or(true, |k| &k != s))
        {
            out.push("non-canonical skill key");
        }
        out
    }
}

/// Vocabulary of canonical skill keys with dense ids (assigned in key order)
/// and display names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkillLexicon {
    keys: Vec<String>,
    display: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl SkillLexicon {
    /// Builds a lexicon from `(key, display)` pairs. Keys are sorted and
    /// deduplicated; the first display name seen for a key wins.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (key, display) in entries {
            map.entry(key).or_insert(display);
        }
        let (keys, display): (Vec<_>, Vec<_>) = map.into_iter().unzip();
        let mut lexicon = SkillLexicon {
            keys,
            display,
            index: BTreeMap::new(),
        };
        lexicon.rebuild_index();
        lexicon
    }

    /// Lexicon whose display names equal the keys.
    pub fn from_keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_entries(keys.into_iter().map(|k| {
            let k = k.into();
            (k.clone(), k)
        }))
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn id(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, id: usize) -> &str {
        &self.keys[id]
    }

    pub fn display(&self, id: usize) -> &str {
        &self.display[id]
    }

    pub fn display_of(&self, key: &str) -> Option<&str> {
        self.id(key).map(|i| self.display(i))
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }
}

/// Column names and cell separator of the profile table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSchema {
    pub worker_id: String,
    pub country: String,
    pub wage: String,
    pub earned: String,
    pub skills: String,
    pub skill_separator: char,
    pub delimiter: u8,
}

impl Default for ProfileSchema {
    fn default() -> Self {
        Self {
            worker_id: "worker_id".into(),
            country: "country".into(),
            wage: "wage".into(),
            earned: "earned".into(),
            skills: "skills".into(),
            skill_separator: '|',
            delimiter: b',',
        }
    }
}

/// A data row that failed validation. Rows are numbered from 1, not counting
/// the header.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    pub row: usize,
    pub error: ProfileError,
}

#[derive(Debug, Clone)]
pub struct ParsedProfiles {
    pub profiles: Vec<WorkerProfile>,
    pub lexicon: SkillLexicon,
    pub rejected: Vec<RejectedRow>,
}

/// Parses a profile table. Header problems are fatal; row problems are
/// collected in [`ParsedProfiles::rejected`] and the row is skipped.
pub fn parse_profiles<R: Read>(
    source: R,
    schema: &ProfileSchema,
) -> Result<ParsedProfiles, ProfileError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ProfileError::MissingColumn(name.to_string()))
    };
    let id_col = column(&schema.worker_id)?;
    let country_col = column(&schema.country)?;
    let wage_col = column(&schema.wage)?;
    let earned_col = column(&schema.earned)?;
    let skills_col = column(&schema.skills)?;

    let mut profiles = Vec::new();
    let mut rejected = Vec::new();
    let mut seen_ids = HashSet::new();
    // key -> raw spelling -> count
    let mut spellings: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let cell = |col: usize| record.get(col).unwrap_or("").trim();

        let parsed = (|| {
            let worker_id = cell(id_col).to_string();
            if worker_id.is_empty() {
                return Err(ProfileError::EmptyWorkerId { row });
            }
            let country = match cell(country_col) {
                "" => UNKNOWN_COUNTRY.to_string(),
                c => c.to_uppercase(),
            };
            let number = |col: usize, field: &str| {
                let raw = cell(col);
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ProfileError::MalformedNumber {
                        row,
                        field: field.to_string(),
                        value: raw.to_string(),
                    })
            };
            let wage = number(wage_col, &schema.wage)?;
            let earned = number(earned_col, &schema.earned)?;
            if wage <= 0.0 {
                return Err(ProfileError::NonPositiveWage { row, value: wage });
            }
            if earned < 0.0 {
                return Err(ProfileError::NegativeEarned { row, value: earned });
            }
            let mut skills = BTreeMap::new();
            for raw in cell(skills_col).split(schema.skill_separator) {
                if let Ok(key) = normalize_skill(raw) {
                    skills
                        .entry(key)
                        .or_insert_with(|| collapse_whitespace(raw));
                }
            }
            if skills.is_empty() {
                return Err(ProfileError::EmptySkillList { row });
            }
            if !seen_ids.insert(worker_id.clone()) {
                return Err(ProfileError::DuplicateWorkerId { row, id: worker_id });
            }
            Ok((worker_id, country, wage, earned, skills))
        })();

        match parsed {
            Ok((worker_id, country, wage, earned, skills)) => {
                for (key, raw) in &skills {
                    *spellings
                        .entry(key.clone())
                        .or_default()
                        .entry(raw.clone())
                        .or_default() += 1;
                }
                profiles.push(WorkerProfile {
                    worker_id,
                    country,
                    wage,
                    earned,
                    skills: skills.into_keys().collect(),
                });
            }
            Err(error) => rejected.push(RejectedRow { row, error }),
        }
    }

    let lexicon = SkillLexicon::from_entries(spellings.into_iter().map(|(key, variants)| {
        // most frequent spelling; BTreeMap order makes ties lexicographic
        let display = variants
            .into_iter()
            .fold((String::new(), 0usize), |best, (raw, n)| {
                if n > best.1 {
                    (raw, n)
                } else {
                    best
                }
            })
            .0;
        (key, display)
    }));

    Ok(ParsedProfiles {
        profiles,
        lexicon,
        rejected,
    })
}

/// Writes profiles in the canonical table format: default column names,
/// skills as sorted canonical keys joined by `|`, numbers in shortest
/// round-trip form.
pub fn write_profiles<W: Write>(sink: W, profiles: &[WorkerProfile]) -> Result<(), ProfileError> {
    let schema = ProfileSchema::default();
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record([
        &schema.worker_id,
        &schema.country,
        &schema.wage,
        &schema.earned,
        &schema.skills,
    ])?;
    for p in profiles {
        let skills = p
            .skills
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join("|");
        writer.write_record([
            p.worker_id.as_str(),
            p.country.as_str(),
            &p.wage.to_string(),
            &p.earned.to_string(),
            &skills,
        ])?;
    }
    writer
        .flush()
        .map_err(|e| ProfileError::Csv(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub workers: usize,
    pub skills: usize,
    pub countries: usize,
    pub wage_range: Option<(f64, f64)>,
    pub earned_range: Option<(f64, f64)>,
}

impl fmt::Display for PopulationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} workers, {} skills, {} countries",
            group_thousands(self.workers),
            group_thousands(self.skills),
            self.countries
        )?;
        if let Some((lo, hi)) = self.wage_range {
            write!(f, "; wage {lo}..{hi} USD/h")?;
        }
        if let Some((lo, hi)) = self.earned_range {
            write!(f, "; earned {lo}..{hi} USD")?;
        }
        Ok(())
    }
}

/// `14790` -> `"14,790"`.
pub fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Checks every profile invariant and summarizes the population.
pub fn validate_population(profiles: &[WorkerProfile]) -> Result<PopulationSummary, ProfileError> {
    let offenders: Vec<String> = profiles
        .iter()
        .filter(|p| !p.violations().is_empty())
        .map(|p| p.worker_id.clone())
        .collect();
    if !offenders.is_empty() {
        return Err(ProfileError::InvariantViolation(offenders));
    }
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        vals.fold(None, |acc: Option<(f64, f64)>, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    };
    let skills: BTreeSet<&str> = profiles
        .iter()
        .flat_map(|p| p.skills.iter().map(String::as_str))
        .collect();
    let countries: BTreeSet<&str> = profiles.iter().map(|p| p.country.as_str()).collect();
    Ok(PopulationSummary {
        workers: profiles.len(),
        skills: skills.len(),
        countries: countries.len(),
        wage_range: range(&mut profiles.iter().map(|p| p.wage)),
        earned_range: range(&mut profiles.iter().map(|p| p.earned)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> ParsedProfiles {
        parse_profiles(text.as_bytes(), &ProfileSchema::default()).unwrap()
    }

    #[test]
    fn normalizes_whitespace_and_case() {
        assert_eq!(
            normalize_skill("  Adobe   Photoshop ").unwrap(),
            "adobe photoshop"
        );
        assert_eq!(normalize_skill("Python").unwrap(), "python");
        assert_eq!(normalize_skill("   "), Err(ProfileError::EmptySkill));
        assert_eq!(normalize_skill("\tC++\n").unwrap(), "c++");
    }

    #[test]
    fn parses_a_basic_row() {
        let parsed = parse("worker_id,country,wage,earned,skills\nw1,US,30.0,1200,python|sql\n");
        assert!(parsed.rejected.is_empty());
        let p = &parsed.profiles[0];
        assert_eq!(p.worker_id, "w1");
        assert_eq!(p.country, "US");
        assert_eq!(p.wage, 30.0);
        assert_eq!(p.earned, 1200.0);
        assert_eq!(p.skills, BTreeSet::from(["python".into(), "sql".into()]));
    }

    #[test]
    fn zero_wage_is_rejected_with_row_number() {
        let parsed = parse(
            "worker_id,country,wage,earned,skills\nw1,US,30.0,1200,python\nw2,DE,0,100,python\n",
        );
        assert_eq!(parsed.profiles.len(), 1);
        assert_eq!(
            parsed.rejected,
            vec![RejectedRow {
                row: 2,
                error: ProfileError::NonPositiveWage { row: 2, value: 0.0 }
            }]
        );
    }

    #[test]
    fn row_errors_name_the_field() {
        let parsed = parse(
            "worker_id,country,wage,earned,skills\n\
             a,US,abc,1,x\n\
             b,US,10,-1,x\n\
             c,US,10,1,\n\
             d,US,10,1, | |\n\
             a2,US,10,1,x\n\
             a2,US,10,1,y\n",
        );
        assert_eq!(parsed.profiles.len(), 1);
        let errors: Vec<_> = parsed.rejected.iter().map(|r| r.error.clone()).collect();
        assert_eq!(
            errors,
            vec![
                ProfileError::MalformedNumber {
                    row: 1,
                    field: "wage".into(),
                    value: "abc".into()
                },
                ProfileError::NegativeEarned {
                    row: 2,
                    value: -1.0
                },
                ProfileError::EmptySkillList { row: 3 },
                ProfileError::EmptySkillList { row: 4 },
                ProfileError::DuplicateWorkerId {
                    row: 6,
                    id: "a2".into()
                },
            ]
        );
    }

    #[test]
    fn missing_column_is_fatal() {
        let err = parse_profiles(
            "worker_id,country,wage,skills\nw1,US,1,x\n".as_bytes(),
            &ProfileSchema::default(),
        )
        .unwrap_err();
        assert_eq!(err, ProfileError::MissingColumn("earned".into()));
    }

    #[test]
    fn custom_schema_and_missing_country() {
        let schema = ProfileSchema {
            worker_id: "id".into(),
            country: "cc".into(),
            wage: "rate".into(),
            earned: "total".into(),
            skills: "tags".into(),
            skill_separator: ';',
            delimiter: b'\t',
        };
        let parsed = parse_profiles(
            "id\tcc\trate\ttotal\ttags\nz\t\t12.5\t0\tA;b\n".as_bytes(),
            &schema,
        )
        .unwrap();
        let p = &parsed.profiles[0];
        assert_eq!(p.country, UNKNOWN_COUNTRY);
        assert_eq!(p.earned, 0.0);
        assert_eq!(p.skills.len(), 2);
    }

    #[test]
    fn fixture_duplicate_skill_cell_collapses() {
        let text = include_str!("../tests/fixtures/five_workers.csv");
        let parsed = parse(text);
        assert!(parsed.rejected.is_empty());
        assert_eq!(parsed.profiles.len(), 5);
        let w3 = parsed
            .profiles
            .iter()
            .find(|p| p.worker_id == "w3")
            .unwrap();
        assert_eq!(w3.skills, BTreeSet::from(["python".to_string()]));
        // python, sql, adobe photoshop, graphic design, data entry, excel
        assert_eq!(parsed.lexicon.len(), 6);
        // "Python" x3 vs "python" x2 across the fixture
        assert_eq!(parsed.lexicon.display_of("python"), Some("Python"));
        assert_eq!(
            parsed.lexicon.display_of("adobe photoshop"),
            Some("Adobe Photoshop")
        );
    }

    #[test]
    fn display_ties_break_lexicographically() {
        let parsed = parse("worker_id,country,wage,earned,skills\na,US,1,1,sql\nb,US,1,1,SQL\n");
        assert_eq!(parsed.lexicon.display_of("sql"), Some("SQL"));
    }

    #[test]
    fn lexicon_ids_are_dense_and_sorted() {
        let lex = SkillLexicon::from_keys(["b", "a", "c", "a"]);
        assert_eq!(lex.keys(), ["a", "b", "c"]);
        for (i, k) in lex.keys().iter().enumerate() {
            assert_eq!(lex.id(k), Some(i));
        }
    }

    #[test]
    fn validate_summarizes_and_rejects() {
        assert_eq!(
            validate_population(&[]).unwrap(),
            PopulationSummary {
                workers: 0,
                skills: 0,
                countries: 0,
                wage_range: None,
                earned_range: None
            }
        );
        let mut profiles = parse(include_str!("../tests/fixtures/five_workers.csv")).profiles;
        let summary = validate_population(&profiles).unwrap();
        assert_eq!(summary.workers, 5);
        assert_eq!(summary.skills, 6);
        assert!(summary.to_string().starts_with("5 workers, 6 skills"));

        profiles[1].wage = -1.0;
        let id = profiles[1].worker_id.clone();
        assert_eq!(
            validate_population(&profiles),
            Err(ProfileError::InvariantViolation(vec![id]))
        );
    }

    #[test]
    fn thousands_grouping() {
        assert_eq!(group_thousands(14790), "14,790");
        assert_eq!(group_thousands(3480), "3,480");
        assert_eq!(group_thousands(999), "999");
        assert_eq!(group_thousands(1_000_000), "1,000,000");
    }

    fn arb_profile() -> impl Strategy<Value = WorkerProfile> {
        (
            "[a-z0-9]{1,8}",
            "[A-Z]{2}",
            0.01f64..1000.0,
            0.0f64..1e6,
            prop::collection::btree_set("[a-z+#]{1,6}( [a-z]{1,4})?", 1..6),
        )
            .prop_map(|(worker_id, country, wage, earned, skills)| WorkerProfile {
                worker_id,
                country,
                wage,
                earned,
                skills,
            })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "\\PC{0,24}") {
            if let Ok(once) = normalize_skill(&raw) {
                prop_assert_eq!(normalize_skill(&once).unwrap(), once);
            }
        }

        #[test]
        fn canonical_csv_round_trips(profiles in prop::collection::vec(arb_profile(), 0..12)) {
            let mut seen = HashSet::new();
            let profiles: Vec<_> = profiles.into_iter().filter(|p| seen.insert(p.worker_id.clone())).collect();
            let mut buf = Vec::new();
            write_profiles(&mut buf, &profiles).unwrap();
            let parsed = parse_profiles(buf.as_slice(), &ProfileSchema::default()).unwrap();
            prop_assert!(parsed.rejected.is_empty());
            prop_assert_eq!(&parsed.profiles, &profiles);
            let distinct: BTreeSet<_> = profiles.iter().flat_map(|p| p.skills.iter()).collect();
            prop_assert_eq!(parsed.lexicon.len(), distinct.len());
        }
    }
}
