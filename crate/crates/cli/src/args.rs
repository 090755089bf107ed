use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use descry::descriptors::{Question, ShapleyMode};
use descry::models::{KnnDistance, LossFunction};
use descry::uncertainty::QuantileFamily;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

fn parse_question(s: &str) -> Result<Question, String> {
    parse_enum(s)
}
fn parse_loss(s: &str) -> Result<LossFunction, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).or_else(|_| parse_enum(s))
}
fn parse_mode(s: &str) -> Result<ShapleyMode, String> {
    parse_enum(s)
}
fn parse_distance(s: &str) -> Result<KnnDistance, String> {
    parse_enum(s)
}
fn parse_family(s: &str) -> Result<QuantileFamily, String> {
    parse_enum(s)
}

#[derive(Debug, Parser)]
#[command(name = "descry", version, about = "Property descriptors with confidence intervals for tabular models")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    /// JSON run configuration (or a manifest from an earlier run) used
    /// instead of a subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory overriding the one in `--config`.
    #[arg(long, requires = "config")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Read a CSV file (or the two student files) into a dataset.
    Ingest(IngestArgs),
    /// Draw a dataset from a phenomenon spec.
    Simulate(SimulateArgs),
    /// Fit a model, or write the optimal predictor of a phenomenon.
    Train(TrainArgs),
    /// Compute one property descriptor.
    Describe(DescribeArgs),
    /// Confidence intervals for a conditional PDP.
    Uncertainty(UncertaintyArgs),
    /// Summarise run directories into one Markdown document.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Simulate(_) => "simulate",
            Command::Train(_) => "train",
            Command::Describe(_) => "describe",
            Command::Uncertainty(_) => "uncertainty",
            Command::Report(_) => "report",
        }
    }

    /// Directory (or, for `report`, file) the run writes to.
    pub fn out(&self) -> &PathBuf {
        match self {
            Command::Ingest(a) => &a.out,
            Command::Simulate(a) => &a.out,
            Command::Train(a) => &a.out,
            Command::Describe(a) => &a.out,
            Command::Uncertainty(a) => &a.out,
            Command::Report(a) => &a.out,
        }
    }
}

/// How a CSV input is read. JSON datasets carry their own schema.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Dataset file: `.json` as written by descry, or CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON for CSV input; `student` selects the bundled student
    /// schema. Without it every column is read as numeric.
    #[arg(long)]
    pub schema: Option<String>,
    /// Target column of a schemaless CSV (default: last column).
    #[arg(long)]
    pub target: Option<String>,
    /// CSV delimiter.
    #[arg(long)]
    pub delimiter: Option<char>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LearnerArgs {
    /// `ols`, `knn`, `mlp`, `constant`, or a learner JSON file. Defaults to
    /// the learner recorded in the model file.
    #[arg(long)]
    pub learner: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    #[arg(long, default_value = "euclidean", value_parser = parse_distance)]
    pub knn_distance: KnnDistance,
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 16, 8])]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// CSV file to read.
    #[arg(long, required_unless_present = "student_math", conflicts_with = "student_math")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Mathematics file of the student data; merged with `--student-por`.
    #[arg(long, requires = "student_por")]
    pub student_math: Option<PathBuf>,
    #[arg(long, requires = "student_math")]
    pub student_por: Option<PathBuf>,
    /// Numeric feature to center on its sample mean.
    #[arg(long)]
    pub center: Option<String>,
    /// Feature to jitter-augment.
    #[arg(long, requires = "offsets")]
    pub jitter: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<f64>>,
    /// Clamp range `lo,hi` for jittered values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub clamp: Option<Vec<f64>>,
    /// Also write a seeded train/test split with this training fraction.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Phenomenon spec JSON; an optional top-level `seed` is used when
    /// `--seed` is absent.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub learner: LearnerArgs,
    /// Write the optimal predictor of this phenomenon spec instead of
    /// training.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Held-out dataset for the test-set loss.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value = "mse", value_parser = parse_loss)]
    pub loss: LossFunction,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DescribeArgs {
    /// Evaluation data.
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Training data for questions that refit submodels.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub learner: LearnerArgs,
    #[arg(long, value_parser = parse_question)]
    pub question: Question,
    #[arg(long)]
    pub feature: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub grid_points: usize,
    /// Explicit grid values, overriding `--grid-points`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Conditioning half-width; defaults to half the median grid gap.
    #[arg(long)]
    pub band: Option<f64>,
    /// Instance for local questions, as stored cells.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub instance: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_rel: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub observed_y: Option<f64>,
    #[arg(long, default_value = "exact", value_parser = parse_mode)]
    pub mode: ShapleyMode,
    #[arg(long, default_value_t = 2000)]
    pub permutations: usize,
    /// Estimate local Shapley values by conditional sampling with this
    /// many neighbours instead of refitting.
    #[arg(long)]
    pub sampled_k: Option<usize>,
    #[arg(long, default_value = "mse", value_parser = parse_loss)]
    pub loss: LossFunction,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMode {
    Estimation,
    Combined,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct UncertaintyArgs {
    /// Evaluation data.
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Training data, refit in combined mode.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub learner: LearnerArgs,
    /// Only `cpdp` supports intervals.
    #[arg(long, default_value = "cpdp", value_parser = parse_question)]
    pub question: Question,
    #[arg(long)]
    pub feature: String,
    #[arg(long, default_value_t = 20)]
    pub grid_points: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub band: Option<f64>,
    #[arg(long, value_enum, default_value = "estimation")]
    pub mode: CiMode,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 50)]
    pub ee_replicates: usize,
    #[arg(long, default_value_t = 20)]
    pub me_replicates: usize,
    /// Fraction of the training data in each refit.
    #[arg(long, default_value_t = 0.5)]
    pub fit_fraction: f64,
    #[arg(long, default_value = "student_t", value_parser = parse_family)]
    pub quantile: QuantileFamily,
    #[arg(long, default_value = "mse", value_parser = parse_loss)]
    pub loss: LossFunction,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Run directories, each holding a `manifest.json`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub runs: Vec<PathBuf>,
    /// Markdown file to write.
    #[arg(long)]
    pub out: PathBuf,
}

/// Turns a JSON run configuration into the equivalent argument vector, so
/// that configs get the same defaults and validation as flags.
pub fn config_to_argv(config: &serde_json::Value) -> Result<Vec<String>, String> {
    let obj = config.as_object().ok_or("config must be a JSON object")?;
    let obj = match obj.get("config") {
        Some(serde_json::Value::Object(inner)) => inner,
        _ => obj,
    };
    let command = obj.get("command").and_then(|c| c.as_str()).ok_or("config lacks a `command` string")?;
    let mut argv = vec!["descry".to_string(), command.to_string()];
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            other => Err(format!("unsupported value for `{key}`: {other}")),
        };
        match value {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => argv.push(flag),
            serde_json::Value::Array(items) if items.is_empty() => {}
            serde_json::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                argv.push(format!("{flag}={}", parts.join(",")));
            }
            v => argv.push(format!("{flag}={}", scalar(v)?)),
        }
    }
    Ok(argv)
}
