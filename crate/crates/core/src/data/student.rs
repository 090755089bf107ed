//! The UCI student-performance data (Cortez & Silva, 2008).
//!
//! Two semicolon-delimited files share one layout: `student-mat.csv` (395
//! students, mathematics) and `student-por.csv` (649 students, Portuguese).
//! Only the final grade `G3` is used; `G1` and `G2` are excluded by the
//! bundled schema. [`merge`] pairs each student's mathematics and Portuguese
//! records on the 13 identity attributes suggested by the dataset authors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::{CsvOptions, DataError, Dataset, FeatureSpec, Provenance, Schema};

/// JSON text of the bundled schema.
pub const SCHEMA_JSON: &str = include_str!("student-schema.json");

/// Attributes identifying the same student in both files.
pub const MERGE_KEYS: [&str; 13] = [
    "school", "sex", "age", "address", "famsize", "Pstatus", "Medu", "Fedu", "Mjob", "Fjob", "reason", "nursery",
    "internet",
];

/// Name of the Portuguese final grade in merged data.
pub const PORTUGUESE_GRADE: &str = "G3_por";
/// Name of the mathematics final grade (the target) in merged data.
pub const MATH_GRADE: &str = "G3_mat";
/// Grade scale of the Portuguese school system.
pub const GRADE_RANGE: (f64, f64) = (0.0, 20.0);

pub fn schema() -> Schema {
    serde_json::from_str(SCHEMA_JSON).expect("bundled student schema is valid")
}

pub fn csv_options() -> CsvOptions {
    CsvOptions { delimiter: b';' }
}

/// Loads one of the two course files with the bundled schema.
pub fn load(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    schema().load(path, &csv_options())
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub dataset: Dataset,
    pub unmatched_math: usize,
    pub unmatched_portuguese: usize,
}

/// Inner join of the two course datasets on [`MERGE_KEYS`].
///
/// Features are the mathematics file's attributes plus [`PORTUGUESE_GRADE`];
/// the target is the mathematics grade, renamed [`MATH_GRADE`]. Students with
/// several matching records contribute one row per matching pair.
pub fn merge(math: &Dataset, portuguese: &Dataset) -> Result<MergeOutcome, DataError> {
    let key_cols = |d: &Dataset| MERGE_KEYS.iter().map(|k| d.feature_index(k)).collect::<Result<Vec<_>, _>>();
    let math_keys = key_cols(math)?;
    let por_keys = key_cols(portuguese)?;
    for (&a, &b) in math_keys.iter().zip(&por_keys) {
        if math.features()[a] != portuguese.features()[b] {
            return Err(DataError::InvalidDataset(format!(
                "key column `{}` differs between the two files",
                math.features()[a].name
            )));
        }
    }
    let key = |row: &[f64], cols: &[usize]| cols.iter().map(|&c| row[c].to_bits()).collect::<Vec<u64>>();

    let mut by_key: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for (i, row) in portuguese.rows().iter().enumerate() {
        by_key.entry(key(row, &por_keys)).or_default().push(i);
    }
    let mut por_matched = vec![false; portuguese.len()];
    let mut unmatched_math = 0;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (row, &y) in math.rows().iter().zip(math.targets()) {
        match by_key.get(&key(row, &math_keys)) {
            Some(matches) => {
                for &j in matches {
                    por_matched[j] = true;
                    let mut r = row.clone();
                    r.push(portuguese.targets()[j]);
                    rows.push(r);
                    targets.push(y);
                }
            }
            None => unmatched_math += 1,
        }
    }
    let mut features = math.features().to_vec();
    let mut por_grade = portuguese.target().clone();
    por_grade.name = PORTUGUESE_GRADE.to_string();
    features.push(por_grade);
    let mut target = math.target().clone();
    target.name = MATH_GRADE.to_string();
    let dataset = Dataset::new(features, target, rows, targets, Provenance::Observed, None)?;
    Ok(MergeOutcome {
        dataset,
        unmatched_math,
        unmatched_portuguese: por_matched.iter().filter(|m| !**m).count(),
    })
}

/// Loads and merges both files.
pub fn load_merged(math_path: impl AsRef<Path>, portuguese_path: impl AsRef<Path>) -> Result<MergeOutcome, DataError> {
    merge(&load(math_path)?, &load(portuguese_path)?)
}

/// Environment variable naming a directory with both student files.
pub const DATA_DIR_ENV: &str = "DESCRY_STUDENT_DIR";
pub const MATH_FILE: &str = "student-mat.csv";
pub const PORTUGUESE_FILE: &str = "student-por.csv";

/// Paths of `student-mat.csv` and `student-por.csv` in the first directory
/// holding both: `$DESCRY_STUDENT_DIR` if set, then each of `fallbacks`.
pub fn locate(fallbacks: &[PathBuf]) -> Option<(PathBuf, PathBuf)> {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .into_iter()
        .chain(fallbacks.iter().cloned())
        .map(|dir| (dir.join(MATH_FILE), dir.join(PORTUGUESE_FILE)))
        .find(|(m, p)| m.is_file() && p.is_file())
}

/// Portuguese-grade schema entry with the default jitter offsets.
pub fn jittered_grade_spec() -> FeatureSpec {
    FeatureSpec::integer(PORTUGUESE_GRADE).with_jitter_offsets(vec![1.0, -1.0, 2.0, -2.0, 3.0, -3.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::read_csv;

    #[test]
    fn bundled_schema_shape() {
        let s = schema();
        assert_eq!(s.columns.len(), 33);
        assert_eq!(s.target, "G3");
        assert_eq!(s.active_columns().len(), 31);
        for c in &s.columns {
            c.validate().unwrap();
        }
    }

    fn line(school: &str, age: u32, g3: u32) -> String {
        let mut cells = vec![
            school.to_string(), "F".into(), age.to_string(), "U".into(), "GT3".into(), "T".into(),
            "4".into(), "4".into(), "teacher".into(), "other".into(), "course".into(), "mother".into(),
            "1".into(), "2".into(), "0".into(),
        ];
        cells.extend(["no", "yes", "no", "no", "yes", "yes", "yes", "no"].map(String::from));
        cells.extend(["4", "3", "4", "1", "1", "3", "6", "5", "6"].map(String::from));
        cells.push(g3.to_string());
        cells.join(";")
    }

    fn file(lines: &[String]) -> Dataset {
        let header = schema().columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>().join(";");
        let text = format!("{header}\n{}\n", lines.join("\n"));
        let s = schema();
        read_csv(text.as_bytes(), &s.active_columns(), &s.target, &csv_options()).unwrap()
    }

    #[test]
    fn merge_pairs_on_identity_keys() {
        let math = file(&[line("GP", 18, 6), line("GP", 17, 10), line("MS", 19, 12)]);
        let por = file(&[line("GP", 18, 11), line("MS", 20, 15), line("GP", 17, 13)]);
        let out = merge(&math, &por).unwrap();
        assert_eq!(out.dataset.len(), 2);
        assert_eq!(out.unmatched_math, 1);
        assert_eq!(out.unmatched_portuguese, 1);
        let p = out.dataset.feature_index(PORTUGUESE_GRADE).unwrap();
        assert_eq!(out.dataset.row(0)[p], 11.0);
        assert_eq!(out.dataset.targets(), &[6.0, 10.0]);
        assert_eq!(out.dataset.target().name, MATH_GRADE);
    }
}
