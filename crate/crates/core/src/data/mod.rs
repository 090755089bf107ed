//! Tabular datasets.
//!
//! A [`Dataset`] is an immutable table of `k` rows by `n` features plus one
//! target column. Categorical cells are stored as the index of their label in
//! the feature's category list, so every row is a plain `Vec<f64>`.
//!
//! The same type plays two roles: training data for a learner and evaluation
//! data on which descriptors are estimated. Evaluation data may be observed
//! rows, augmented copies (see [`jitter_augment`]) or synthetic draws from a
//! [`crate::phenomenon::Phenomenon`]; [`Provenance`] records which.

mod csv_io;
pub mod student;

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::{derive_seed, rng};

pub use csv_io::{load_csv, read_csv, write_csv, CsvOptions, Schema};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse {value:?} as {kind}")]
    TypeMismatch {
        row: usize,
        column: String,
        value: String,
        kind: &'static str,
    },
    #[error("CSV file has no data rows")]
    EmptyFile,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` is not numeric")]
    NonNumericFeature(String),
    #[error("split leaves one side empty ({train} train / {test} test rows)")]
    DegenerateSplit { train: usize, test: usize },
    #[error("replicate index {index} out of range for {replicates} replicates")]
    IndexOutOfRange { index: usize, replicates: usize },
    #[error("invalid jitter offsets: {0}")]
    InvalidOffsets(String),
    #[error("invalid resample plan: {0}")]
    InvalidPlan(String),
    #[error("invalid feature spec `{name}`: {reason}")]
    InvalidFeatureSpec { name: String, reason: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DataError {
    pub fn code(&self) -> &'static str {
        match self {
            DataError::MissingColumn(_) => "MissingColumn",
            DataError::TypeMismatch { .. } => "TypeMismatch",
            DataError::EmptyFile => "EmptyFile",
            DataError::UnknownFeature(_) => "UnknownFeature",
            DataError::NonNumericFeature(_) => "NonNumericFeature",
            DataError::DegenerateSplit { .. } => "DegenerateSplit",
            DataError::IndexOutOfRange { .. } => "IndexOutOfRange",
            DataError::InvalidOffsets(_) => "InvalidOffsets",
            DataError::InvalidPlan(_) => "InvalidPlan",
            DataError::InvalidFeatureSpec { .. } => "InvalidFeatureSpec",
            DataError::InvalidDataset(_) => "InvalidDataset",
            DataError::Io(_) => "Io",
            DataError::Csv(_) => "Csv",
            DataError::Json(_) => "Json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Integer,
    Categorical,
}

impl FeatureKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, FeatureKind::Categorical)
    }

    fn label(self) -> &'static str {
        match self {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Integer => "integer",
            FeatureKind::Categorical => "categorical",
        }
    }
}

/// Name, kind and optional metadata of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    /// Default offsets used when the feature is jitter-augmented.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_offsets: Option<Vec<f64>>,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: FeatureKind::Numeric, categories: None, jitter_offsets: None }
    }

    pub fn integer(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: FeatureKind::Integer, categories: None, jitter_offsets: None }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories: Some(categories.into_iter().map(Into::into).collect()),
            jitter_offsets: None,
        }
    }

    pub fn with_jitter_offsets(mut self, offsets: Vec<f64>) -> Self {
        self.jitter_offsets = Some(offsets);
        self
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |reason: &str| DataError::InvalidFeatureSpec { name: self.name.clone(), reason: reason.into() };
        match (self.kind, &self.categories) {
            (FeatureKind::Categorical, Some(c)) if !c.is_empty() => {}
            (FeatureKind::Categorical, _) => return Err(bad("categorical feature needs a non-empty category list")),
            (_, Some(_)) => return Err(bad("only categorical features carry categories")),
            _ => {}
        }
        if let Some(offsets) = &self.jitter_offsets {
            if self.kind == FeatureKind::Categorical {
                return Err(bad("jitter offsets on a categorical feature"));
            }
            validate_offsets(offsets).map_err(|e| bad(&e.to_string()))?;
        }
        Ok(())
    }

    /// Whether `value` is a legal cell for this feature.
    pub fn accepts(&self, value: f64) -> bool {
        match self.kind {
            FeatureKind::Numeric => value.is_finite(),
            FeatureKind::Integer => value.is_finite() && value.fract() == 0.0,
            FeatureKind::Categorical => {
                let n = self.categories.as_ref().map_or(0, Vec::len);
                value.fract() == 0.0 && value >= 0.0 && (value as usize) < n
            }
        }
    }

    /// Display form of a stored cell (the label for categorical features).
    pub fn format_value(&self, value: f64) -> String {
        match (&self.kind, &self.categories) {
            (FeatureKind::Categorical, Some(c)) => c.get(value as usize).cloned().unwrap_or_else(|| value.to_string()),
            _ => value.to_string(),
        }
    }
}

fn validate_offsets(offsets: &[f64]) -> Result<(), DataError> {
    if offsets.is_empty() {
        return Err(DataError::InvalidOffsets("offset list is empty".into()));
    }
    let mut seen = HashSet::new();
    for &o in offsets {
        if !o.is_finite() || o == 0.0 {
            return Err(DataError::InvalidOffsets(format!("offset {o} must be finite and non-zero")));
        }
        if !seen.insert(o.to_bits()) {
            return Err(DataError::InvalidOffsets(format!("duplicate offset {o}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Augmented,
    Synthetic,
}

#[derive(Serialize, Deserialize)]
struct SchemaBlock {
    features: Vec<FeatureSpec>,
    target: FeatureSpec,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    schema: SchemaBlock,
    provenance: Provenance,
    #[serde(default)]
    seed: Option<u64>,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

/// An immutable i.i.d. sample with feature metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    features: Vec<FeatureSpec>,
    target: FeatureSpec,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    provenance: Provenance,
    seed: Option<u64>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = DataError;

    fn try_from(r: DatasetRepr) -> Result<Self, DataError> {
        Dataset::new(r.schema.features, r.schema.target, r.rows, r.targets, r.provenance, r.seed)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(d: Dataset) -> Self {
        DatasetRepr {
            schema: SchemaBlock { features: d.features, target: d.target },
            provenance: d.provenance,
            seed: d.seed,
            rows: d.rows,
            targets: d.targets,
        }
    }
}

impl Dataset {
    pub fn new(
        features: Vec<FeatureSpec>,
        target: FeatureSpec,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        provenance: Provenance,
        seed: Option<u64>,
    ) -> Result<Self, DataError> {
        for f in features.iter().chain(std::iter::once(&target)) {
            f.validate()?;
        }
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(DataError::InvalidDataset(format!("duplicate feature name `{}`", f.name)));
            }
        }
        if targets.len() != rows.len() {
            return Err(DataError::InvalidDataset(format!(
                "{} targets for {} rows",
                targets.len(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != features.len() {
                return Err(DataError::InvalidDataset(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    features.len()
                )));
            }
            for (f, &v) in features.iter().zip(row) {
                if !f.accepts(v) {
                    return Err(DataError::InvalidDataset(format!(
                        "row {i}: value {v} is not a valid {} cell for `{}`",
                        f.kind.label(),
                        f.name
                    )));
                }
            }
            if !target.accepts(targets[i]) {
                return Err(DataError::InvalidDataset(format!("row {i}: invalid target {}", targets[i])));
            }
        }
        Ok(Self { features, target, rows, targets, provenance, seed })
    }

    /// Same schema, new rows. Skips per-cell validation; callers only pass
    /// rows derived from this dataset.
    fn with_rows(&self, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Self {
        Self {
            features: self.features.clone(),
            target: self.target.clone(),
            rows,
            targets,
            provenance: self.provenance,
            seed: self.seed,
        }
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn target(&self) -> &FeatureSpec {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize, DataError> {
        self.features
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| DataError::UnknownFeature(name.to_string()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let targets = indices.iter().map(|&i| self.targets[i]).collect();
        self.with_rows(rows, targets)
    }

    /// Keeps only the features at `columns`, in that order.
    pub fn select_features(&self, columns: &[usize]) -> Dataset {
        Dataset {
            features: columns.iter().map(|&j| self.features[j].clone()).collect(),
            target: self.target.clone(),
            rows: self.rows.iter().map(|r| columns.iter().map(|&j| r[j]).collect()).collect(),
            targets: self.targets.clone(),
            provenance: self.provenance,
            seed: self.seed,
        }
    }

    /// Replaces the target column.
    pub fn with_targets(&self, target: FeatureSpec, targets: Vec<f64>) -> Result<Dataset, DataError> {
        Dataset::new(self.features.clone(), target, self.rows.clone(), targets, self.provenance, self.seed)
    }

    /// Stable content hash of schema, rows and targets (hex, 32 chars).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for f in self.features.iter().chain(std::iter::once(&self.target)) {
            h.update(f.name.as_bytes());
            h.update([0u8, f.kind as u8]);
        }
        h.update((self.rows.len() as u64).to_le_bytes());
        for (row, t) in self.rows.iter().zip(&self.targets) {
            for v in row {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update(t.to_bits().to_le_bytes());
        }
        h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn numeric_feature(&self, name: &str) -> Result<usize, DataError> {
        let j = self.feature_index(name)?;
        if !self.features[j].kind.is_numeric() {
            return Err(DataError::NonNumericFeature(name.to_string()));
        }
        Ok(j)
    }
}

/// Subtracts the sample mean from one numeric column.
///
/// Returns the centered dataset and the mean that was removed.
pub fn center_feature(d: &Dataset, feature: &str) -> Result<(Dataset, f64), DataError> {
    let j = d.numeric_feature(feature)?;
    let mean = crate::stats::mean(&d.column(j));
    let rows = d
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r[j] -= mean;
            r
        })
        .collect();
    let mut out = d.with_rows(rows, d.targets.clone());
    out.features[j].kind = FeatureKind::Numeric;
    Ok((out, mean))
}

/// Appends one shifted copy of the data per offset.
///
/// The output holds the original rows followed by `|offsets|` copies, copy
/// `c` having `feature` shifted by `offsets[c]` and, when `clamp` is given,
/// clamped into `[lo, hi]`. All other cells are copied bit for bit.
pub fn jitter_augment(
    d: &Dataset,
    feature: &str,
    offsets: &[f64],
    clamp: Option<(f64, f64)>,
) -> Result<Dataset, DataError> {
    let j = d.numeric_feature(feature)?;
    validate_offsets(offsets)?;
    if let Some((lo, hi)) = clamp {
        if !(lo <= hi) {
            return Err(DataError::InvalidOffsets(format!("clamp range [{lo}, {hi}] is empty")));
        }
    }
    let k = d.len();
    let mut rows = Vec::with_capacity(k * (1 + offsets.len()));
    let mut targets = Vec::with_capacity(rows.capacity());
    rows.extend(d.rows.iter().cloned());
    targets.extend_from_slice(&d.targets);
    for &o in offsets {
        for (r, &t) in d.rows.iter().zip(&d.targets) {
            let mut r = r.clone();
            let mut v = r[j] + o;
            if let Some((lo, hi)) = clamp {
                v = v.clamp(lo, hi);
            }
            r[j] = v;
            rows.push(r);
            targets.push(t);
        }
    }
    let mut out = d.with_rows(rows, targets);
    if out.features[j].kind == FeatureKind::Integer && out.rows.iter().any(|r| r[j].fract() != 0.0) {
        out.features[j].kind = FeatureKind::Numeric;
    }
    out.provenance = Provenance::Augmented;
    Ok(out)
}

/// Random disjoint train/test partition.
///
/// The train side holds `floor(train_fraction * k)` rows. Both sides keep the
/// input row order.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    let k = d.len();
    let n_train = if train_fraction > 0.0 && train_fraction < 1.0 {
        (train_fraction * k as f64).floor() as usize
    } else if train_fraction >= 1.0 {
        k
    } else {
        0
    };
    if n_train == 0 || n_train == k {
        return Err(DataError::DegenerateSplit { train: n_train, test: k - n_train });
    }
    let mut r = rng(seed);
    let mut train: Vec<usize> = index::sample(&mut r, k, n_train).into_vec();
    train.sort_unstable();
    let mut in_train = vec![false; k];
    for &i in &train {
        in_train[i] = true;
    }
    let test: Vec<usize> = (0..k).filter(|&i| !in_train[i]).collect();
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    Bootstrap,
    Subsample,
}

/// How replicate datasets are drawn from a source dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub method: ResampleMethod,
    /// Fraction of rows kept by subsampling; ignored for the bootstrap.
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    pub replicates: usize,
    pub seed: u64,
}

fn default_fraction() -> f64 {
    1.0
}

impl ResamplePlan {
    pub fn bootstrap(replicates: usize, seed: u64) -> Self {
        Self { method: ResampleMethod::Bootstrap, fraction: 1.0, replicates, seed }
    }

    pub fn subsample(fraction: f64, replicates: usize, seed: u64) -> Self {
        Self { method: ResampleMethod::Subsample, fraction, replicates, seed }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.replicates == 0 {
            return Err(DataError::InvalidPlan("replicates must be positive".into()));
        }
        if self.method == ResampleMethod::Subsample && !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(DataError::InvalidPlan(format!("fraction {} outside (0, 1]", self.fraction)));
        }
        Ok(())
    }

    /// Row indices of replicate `replicate_index` out of `k` source rows.
    pub fn indices(&self, k: usize, replicate_index: usize) -> Result<Vec<usize>, DataError> {
        self.validate()?;
        if replicate_index >= self.replicates {
            return Err(DataError::IndexOutOfRange { index: replicate_index, replicates: self.replicates });
        }
        let mut r = rng(derive_seed(self.seed, replicate_index as u64));
        Ok(match self.method {
            ResampleMethod::Bootstrap => (0..k).map(|_| r.random_range(0..k)).collect(),
            ResampleMethod::Subsample => {
                let m = (self.fraction * k as f64).floor() as usize;
                let mut idx = index::sample(&mut r, k, m).into_vec();
                idx.sort_unstable();
                idx
            }
        })
    }
}

/// Draws replicate `replicate_index` of `plan` from `d`.
pub fn resample(d: &Dataset, plan: &ResamplePlan, replicate_index: usize) -> Result<Dataset, DataError> {
    let idx = plan.indices(d.len(), replicate_index)?;
    Ok(d.select_rows(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grades(values: &[f64]) -> Dataset {
        let rows = values.iter().map(|&v| vec![v, 1.0]).collect();
        let targets = values.iter().map(|v| v * 0.5).collect();
        Dataset::new(
            vec![FeatureSpec::integer("g"), FeatureSpec::numeric("other")],
            FeatureSpec::numeric("y"),
            rows,
            targets,
            Provenance::Observed,
            None,
        )
        .unwrap()
    }

    #[test]
    fn centering_arithmetic() {
        let d = grades(&[12.0, 13.0, 14.0]);
        let (c, mean) = center_feature(&d, "g").unwrap();
        assert_eq!(mean, 13.0);
        assert_eq!(c.column(0), vec![-1.0, 0.0, 1.0]);
        let (_, again) = center_feature(&c, "g").unwrap();
        assert!(again.abs() < 1e-12);
    }

    #[test]
    fn centering_rejects_bad_features() {
        let d = grades(&[1.0]);
        assert!(matches!(center_feature(&d, "nope"), Err(DataError::UnknownFeature(_))));
        let cat = Dataset::new(
            vec![FeatureSpec::categorical("c", ["a", "b"])],
            FeatureSpec::numeric("y"),
            vec![vec![1.0]],
            vec![0.0],
            Provenance::Observed,
            None,
        )
        .unwrap();
        assert!(matches!(center_feature(&cat, "c"), Err(DataError::NonNumericFeature(_))));
    }

    #[test]
    fn jitter_row_count_and_clamp() {
        let d = grades(&[19.0, 10.0]);
        let out = jitter_augment(&d, "g", &[1.0, -1.0, 2.0, -2.0, 3.0, -3.0], Some((0.0, 20.0))).unwrap();
        assert_eq!(out.len(), 2 * 7);
        assert_eq!(out.provenance(), Provenance::Augmented);
        // copy for +3 starts at row 2 * 5 = 10
        assert_eq!(out.row(10)[0], 20.0);
        assert_eq!(out.row(11)[0], 13.0);
        assert!(out.rows().iter().all(|r| r[1].to_bits() == 1.0f64.to_bits()));
    }

    #[test]
    fn jitter_rejects_empty_and_zero_offsets() {
        let d = grades(&[1.0]);
        assert!(matches!(jitter_augment(&d, "g", &[], None), Err(DataError::InvalidOffsets(_))));
        assert!(matches!(jitter_augment(&d, "g", &[0.0], None), Err(DataError::InvalidOffsets(_))));
        assert!(matches!(jitter_augment(&d, "g", &[1.0, 1.0], None), Err(DataError::InvalidOffsets(_))));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = grades(&(0..395).map(|i| (i % 21) as f64).collect::<Vec<_>>());
        let (a, b) = split(&d, 0.8, 3).unwrap();
        assert_eq!((a.len(), b.len()), (316, 79));
        let (a2, b2) = split(&d, 0.8, 3).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        assert!(matches!(split(&d, 1.0, 3), Err(DataError::DegenerateSplit { .. })));
        assert!(matches!(split(&d, 0.0, 3), Err(DataError::DegenerateSplit { .. })));
    }

    #[test]
    fn resample_sizes() {
        let d = grades(&(0..10).map(f64::from).collect::<Vec<_>>());
        let boot = resample(&d, &ResamplePlan::bootstrap(5, 1), 0).unwrap();
        assert_eq!(boot.len(), 10);
        let big = grades(&(0..1000).map(|i| (i % 21) as f64).collect::<Vec<_>>());
        let plan = ResamplePlan::subsample(0.632, 3, 9);
        let idx = plan.indices(big.len(), 0).unwrap();
        assert_eq!(idx.len(), 632);
        let distinct: HashSet<_> = idx.iter().collect();
        assert_eq!(distinct.len(), 632);
        assert!(matches!(
            resample(&d, &ResamplePlan::bootstrap(5, 1), 5),
            Err(DataError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn replicates_draw_different_multisets() {
        // brute-force comparison of the sorted index multisets
        let plan = ResamplePlan::bootstrap(2, 42);
        let mut a = plan.indices(1000, 0).unwrap();
        let mut b = plan.indices(1000, 1).unwrap();
        a.sort_unstable();
        b.sort_unstable();
        assert_ne!(a, b);
        assert_eq!(plan.indices(1000, 1).unwrap(), plan.indices(1000, 1).unwrap());
    }

    #[test]
    fn spec_invariants() {
        assert!(FeatureSpec::categorical("c", Vec::<String>::new()).validate().is_err());
        let mut f = FeatureSpec::numeric("x");
        f.categories = Some(vec!["a".into()]);
        assert!(f.validate().is_err());
        assert!(FeatureSpec::numeric("x").with_jitter_offsets(vec![1.0, 0.0]).validate().is_err());
        assert!(FeatureSpec::numeric("x").with_jitter_offsets(vec![1.0, -1.0]).validate().is_ok());
    }

    #[test]
    fn dataset_json_roundtrip_validates() {
        let d = grades(&[1.0, 2.0]);
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"schema\""));
        let back: Dataset = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let broken = s.replace("\"targets\":[0.5,1.0]", "\"targets\":[0.5]");
        assert!(serde_json::from_str::<Dataset>(&broken).is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = grades(&[1.0, 2.0]);
        let b = grades(&[1.0, 3.0]);
        assert_eq!(a.fingerprint(), grades(&[1.0, 2.0]).fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
