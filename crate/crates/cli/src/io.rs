use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use descry::data::{student, CsvOptions, Dataset, FeatureSpec, Schema};
use descry::models::PredictorHandle;
use serde::Serialize;

use crate::args::{Command, InputArgs};
use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn read_text(operation: &str, path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(operation, path, e))
}

pub fn read_json(operation: &str, path: &Path) -> Result<serde_json::Value> {
    serde_json::from_str(&read_text(operation, path)?)
        .map_err(|e| CliError::runtime(operation, "InvalidJson", format!("{}: {e}", path.display())))
}

pub fn load_dataset(operation: &str, path: &Path, input: &InputArgs) -> Result<Dataset> {
    read_dataset(operation, path, input.schema.as_deref(), input.target.as_deref(), input.delimiter)
}

pub fn load_input(operation: &str, input: &InputArgs) -> Result<Dataset> {
    load_dataset(operation, &input.data, input)
}

/// Reads a dataset JSON, or a CSV with a schema file, the bundled student
/// schema, or all-numeric columns.
pub fn read_dataset(
    operation: &str,
    path: &Path,
    schema: Option<&str>,
    target: Option<&str>,
    delimiter: Option<char>,
) -> Result<Dataset> {
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str(&read_text(operation, path)?)
            .map_err(|e| CliError::runtime(operation, "InvalidDataset", format!("{}: {e}", path.display())));
    }
    let (mut schema, mut options) = match schema {
        Some("student") => (student::schema(), student::csv_options()),
        Some(file) => {
            (Schema::from_json_file(file).map_err(|e| CliError::core(operation, e))?, CsvOptions::default())
        }
        None => (infer_schema(operation, path, target, delimiter)?, CsvOptions::default()),
    };
    if let Some(c) = delimiter {
        options.delimiter = u8::try_from(c).map_err(|_| CliError::usage(operation, "delimiter must be ASCII"))?;
    }
    if let Some(t) = target {
        schema.target = t.to_string();
    }
    schema.load(path, &options).map_err(|e| CliError::core(operation, e))
}

fn infer_schema(operation: &str, path: &Path, target: Option<&str>, delimiter: Option<char>) -> Result<Schema> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter.map_or(b',', |c| c as u8))
        .from_path(path)
        .map_err(|e| CliError::io(operation, path, e))?;
    let headers: Vec<String> =
        rdr.headers().map_err(|e| CliError::io(operation, path, e))?.iter().map(|h| h.trim().to_string()).collect();
    let target = match target {
        Some(t) => t.to_string(),
        None => headers.last().cloned().ok_or_else(|| CliError::runtime(operation, "EmptyFile", "no header row"))?,
    };
    Ok(Schema { columns: headers.into_iter().map(FeatureSpec::numeric).collect(), target, exclude: Vec::new() })
}

pub fn load_model(operation: &str, path: &Path) -> Result<PredictorHandle> {
    PredictorHandle::from_json(&read_text(operation, path)?)
        .map_err(|e| CliError::runtime(operation, "InvalidModel", format!("{}: {e}", path.display())))
}

pub fn dataset_csv(operation: &str, d: &Dataset) -> Result<String> {
    let mut buf = Vec::new();
    descry::data::write_csv(d, &mut buf).map_err(|e| CliError::core(operation, e))?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serialises");
    s.push('\n');
    s
}

/// Collects the artifacts of one run and writes them, then the manifest.
pub struct RunDir {
    operation: &'static str,
    dir: PathBuf,
    outputs: Vec<String>,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
}

impl RunDir {
    pub fn create(operation: &'static str, dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(operation, dir, e))?;
        Ok(Self { operation, dir: dir.to_path_buf(), outputs: Vec::new(), seeds: BTreeMap::new(), inputs: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(self.operation, &path, e))?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_dataset(&mut self, stem: &str, d: &Dataset) -> Result<()> {
        self.write(&format!("{stem}.json"), &pretty(d))?;
        self.write(&format!("{stem}.csv"), &dataset_csv(self.operation, d)?)
    }

    pub fn seed(&mut self, label: &str, seed: u64) {
        self.seeds.insert(label.to_string(), seed);
    }

    /// Records the fingerprint of an input dataset.
    pub fn input(&mut self, label: &str, d: &Dataset) {
        self.inputs.insert(label.to_string(), d.fingerprint());
    }

    pub fn finish(mut self, command: &Command) -> Result<()> {
        self.outputs.sort();
        let manifest = serde_json::json!({
            "tool": "descry",
            "version": VERSION,
            "config": command,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let path = self.dir.join("manifest.json");
        fs::write(&path, pretty(&manifest)).map_err(|e| CliError::io(self.operation, &path, e))
    }
}
