use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, FeatureKind, FeatureSpec, Provenance};

/// CSV dialect. The UCI student files use `;`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

/// Column description of a CSV file: which columns to read, which one is the
/// target, and which to skip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<FeatureSpec>,
    pub target: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<String>,
}

impl Schema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Schema of an existing dataset, suitable for reading back its CSV.
    pub fn of(d: &Dataset) -> Self {
        let mut columns = d.features().to_vec();
        columns.push(d.target().clone());
        Self { columns, target: d.target().name.clone(), exclude: Vec::new() }
    }

    /// Columns that are actually read.
    pub fn active_columns(&self) -> Vec<FeatureSpec> {
        self.columns.iter().filter(|c| !self.exclude.contains(&c.name)).cloned().collect()
    }

    pub fn load(&self, path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset, DataError> {
        load_csv(path, &self.active_columns(), &self.target, options)
    }
}

/// Reads a CSV file into an observed [`Dataset`].
///
/// `schema` lists the columns to read (extra file columns are ignored); the
/// entry named `target_name` becomes the target, the rest become features in
/// schema order. A target missing from `schema` is read as numeric.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &[FeatureSpec],
    target_name: &str,
    options: &CsvOptions,
) -> Result<Dataset, DataError> {
    read_csv(File::open(path)?, schema, target_name, options)
}

pub fn read_csv<R: Read>(
    reader: R,
    schema: &[FeatureSpec],
    target_name: &str,
    options: &CsvOptions,
) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(DataError::EmptyFile);
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };

    let target = schema
        .iter()
        .find(|c| c.name == target_name)
        .cloned()
        .unwrap_or_else(|| FeatureSpec::numeric(target_name));
    let features: Vec<FeatureSpec> = schema.iter().filter(|c| c.name != target_name).cloned().collect();
    let feature_pos = features.iter().map(|f| position(&f.name)).collect::<Result<Vec<_>, _>>()?;
    let target_pos = position(target_name)?;

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = features
            .iter()
            .zip(&feature_pos)
            .map(|(f, &p)| parse_cell(record.get(p).unwrap_or(""), f, i))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
        targets.push(parse_cell(record.get(target_pos).unwrap_or(""), &target, i)?);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    Dataset::new(features, target, rows, targets, Provenance::Observed, None)
}

fn parse_cell(raw: &str, spec: &FeatureSpec, row: usize) -> Result<f64, DataError> {
    let s = raw.trim();
    let mismatch = || DataError::TypeMismatch {
        row,
        column: spec.name.clone(),
        value: raw.to_string(),
        kind: match spec.kind {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Integer => "integer",
            FeatureKind::Categorical => "categorical",
        },
    };
    match spec.kind {
        FeatureKind::Numeric => s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(mismatch),
        FeatureKind::Integer => s.parse::<i64>().map(|v| v as f64).map_err(|_| mismatch()),
        FeatureKind::Categorical => spec
            .categories
            .as_ref()
            .and_then(|c| c.iter().position(|label| label == s))
            .map(|i| i as f64)
            .ok_or_else(mismatch),
    }
}

/// Writes features then target, one header row, categorical cells as labels.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = d.features().iter().map(|f| f.name.as_str()).collect();
    header.push(&d.target().name);
    w.write_record(&header)?;
    for (row, &t) in d.rows().iter().zip(d.targets()) {
        let mut rec: Vec<String> = d.features().iter().zip(row).map(|(f, &v)| f.format_value(v)).collect();
        rec.push(d.target().format_value(t));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
