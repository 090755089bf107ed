use std::fmt::Write;

use descry::data::{center_feature, jitter_augment, split, student, Dataset, ResamplePlan};
use descry::descriptors::{
    counterfactual_local, cpdp_with_band, cpfi, ice, local_conditional_contribution, relevant_value_global, sage,
    shapley_local, shapley_local_sampled, DescriptorResult, Payload, Question, DEFAULT_PERTURBATIONS,
};
use descry::models::{epe, train, LearnerConfig, MlpConfig, PredictorHandle};
use descry::phenomenon::{optimal_predictor, OptimalPredictorSpec, Phenomenon};
use descry::samplers::{build_grid, default_band, Grid};
use descry::uncertainty::{ci_combined, ci_estimation, CIConfig, CurveTarget, UncertaintyReport};

use crate::args::{CiMode, Command, DescribeArgs, IngestArgs, LearnerArgs, SimulateArgs, TrainArgs, UncertaintyArgs};
use crate::error::{CliError, Result};
use crate::io::{load_dataset, load_input, load_model, pretty, read_json, read_text, RunDir};
use crate::svg::{self, Band, Plot};

pub fn ingest(a: &IngestArgs, command: &Command) -> Result<()> {
    const OP: &str = "ingest";
    let mut run = RunDir::create(OP, &a.out)?;
    let mut summary = serde_json::Map::new();
    let mut d = match (&a.student_math, &a.student_por, &a.data) {
        (Some(m), Some(p), _) => {
            let outcome = student::load_merged(m, p).map_err(|e| CliError::core(OP, e))?;
            summary.insert("unmatched_math".into(), outcome.unmatched_math.into());
            summary.insert("unmatched_portuguese".into(), outcome.unmatched_portuguese.into());
            outcome.dataset
        }
        (_, _, Some(path)) => crate::io::read_dataset(OP, path, a.schema.as_deref(), a.target.as_deref(), a.delimiter)?,
        _ => return Err(CliError::usage(OP, "give --data or both student files")),
    };
    if let Some(feature) = &a.center {
        let (centered, mean) = center_feature(&d, feature).map_err(|e| CliError::core(OP, e))?;
        summary.insert("centered_feature".into(), feature.clone().into());
        summary.insert("removed_mean".into(), mean.into());
        d = centered;
    }
    if let Some(feature) = &a.jitter {
        let offsets = a.offsets.as_deref().unwrap_or_default();
        let clamp = match a.clamp.as_deref() {
            None => None,
            Some([lo, hi]) => Some((*lo, *hi)),
            Some(_) => return Err(CliError::usage(OP, "--clamp takes exactly two values: lo,hi")),
        };
        d = jitter_augment(&d, feature, offsets, clamp).map_err(|e| CliError::core(OP, e))?;
        summary.insert("jittered_feature".into(), feature.clone().into());
    }
    summary.insert("rows".into(), d.len().into());
    summary.insert("features".into(), d.n_features().into());
    summary.insert("fingerprint".into(), d.fingerprint().into());
    run.write_dataset("dataset", &d)?;
    if let Some(fraction) = a.split {
        let (train_set, test_set) = split(&d, fraction, a.seed).map_err(|e| CliError::core(OP, e))?;
        summary.insert("train_rows".into(), train_set.len().into());
        summary.insert("test_rows".into(), test_set.len().into());
        run.write_dataset("train", &train_set)?;
        run.write_dataset("test", &test_set)?;
        run.seed("split", a.seed);
    }
    run.write("summary.json", &pretty(&summary))?;
    run.write("summary.csv", &key_value_csv(&summary))?;
    run.finish(command)
}

fn key_value_csv(map: &serde_json::Map<String, serde_json::Value>) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in map {
        let v = match v {
            serde_json::Value::String(t) => t.clone(),
            other => other.to_string(),
        };
        writeln!(s, "{k},{v}").unwrap();
    }
    s
}

fn read_phenomenon(op: &str, path: &std::path::Path) -> Result<(Phenomenon, Option<u64>)> {
    let mut value = read_json(op, path)?;
    let seed = value.as_object_mut().and_then(|o| o.remove("seed")).and_then(|s| s.as_u64());
    let p: Phenomenon = serde_json::from_value(value)
        .map_err(|e| CliError::runtime(op, "InvalidPhenomenon", format!("{}: {e}", path.display())))?;
    p.validate().map_err(|e| CliError::core(op, e))?;
    Ok((p, seed))
}

pub fn simulate(a: &SimulateArgs, command: &Command) -> Result<()> {
    const OP: &str = "simulate";
    let (p, spec_seed) = read_phenomenon(OP, &a.spec)?;
    let seed = a.seed.or(spec_seed).unwrap_or(0);
    let d = p.sample(a.k, seed).map_err(|e| CliError::core(OP, e))?;
    let mut run = RunDir::create(OP, &a.out)?;
    run.seed("sample", seed);
    run.write_dataset("dataset", &d)?;
    let mut echo = serde_json::to_value(&p).expect("phenomenon serialises");
    echo.as_object_mut().expect("tagged object").insert("seed".into(), seed.into());
    run.write("phenomenon.json", &pretty(&echo))?;
    let mut summary = serde_json::Map::new();
    summary.insert("rows".into(), d.len().into());
    summary.insert("features".into(), d.n_features().into());
    summary.insert("fingerprint".into(), d.fingerprint().into());
    run.write("summary.csv", &key_value_csv(&summary))?;
    run.finish(command)
}

/// Learner from the flags, a learner file, or the metadata of `model`.
pub fn learner_config(op: &str, a: &LearnerArgs, model: Option<&PredictorHandle>, seed: u64) -> Result<LearnerConfig> {
    let config = match a.learner.as_deref() {
        Some("ols") => LearnerConfig::Ols,
        Some("knn") => LearnerConfig::Knn { k: a.knn_k, distance: a.knn_distance },
        Some("mlp") => LearnerConfig::Mlp(MlpConfig {
            hidden: a.hidden.clone(),
            learning_rate: a.learning_rate,
            decay: a.decay,
            epochs: a.epochs,
            batch_size: a.batch_size,
            seed,
        }),
        Some("constant") => LearnerConfig::Constant,
        Some(path) => {
            let text = read_text(op, std::path::Path::new(path))?;
            serde_json::from_str(&text).map_err(|e| CliError::runtime(op, "InvalidLearner", format!("{path}: {e}")))?
        }
        None => {
            let model = model.ok_or_else(|| CliError::usage(op, "give --learner or a --model trained by descry"))?;
            serde_json::from_value(model.metadata.hyperparameters.clone()).map_err(|_| {
                CliError::usage(op, format!("model learner `{}` cannot be refit; give --learner", model.metadata.learner))
            })?
        }
    };
    Ok(config)
}

pub fn train_cmd(a: &TrainArgs, command: &Command) -> Result<()> {
    const OP: &str = "train";
    let d = load_input(OP, &a.input)?;
    let mut run = RunDir::create(OP, &a.out)?;
    run.input("data", &d);
    let h = match &a.oracle {
        Some(spec) => {
            let (phenomenon, _) = read_phenomenon(OP, spec)?;
            optimal_predictor(&OptimalPredictorSpec { phenomenon, loss: a.loss }).map_err(|e| CliError::core(OP, e))?
        }
        None => {
            let mut learner = a.learner.clone();
            learner.learner.get_or_insert_with(|| "ols".into());
            let config = learner_config(OP, &learner, None, a.seed)?;
            run.seed("learner", a.seed);
            train(&config, &d, a.loss).map_err(|e| CliError::core(OP, e))?
        }
    };
    h.check_dataset(&d).map_err(|e| CliError::core(OP, e))?;
    let mut metrics = serde_json::Map::new();
    metrics.insert("learner".into(), h.metadata.learner.clone().into());
    metrics.insert("loss".into(), serde_json::to_value(a.loss).unwrap());
    metrics.insert("train_loss".into(), epe(&h, &d, a.loss).map_err(|e| CliError::core(OP, e))?.into());
    if let Some(test) = &a.test {
        let t = load_dataset(OP, test, &a.input)?;
        run.input("test", &t);
        metrics.insert("test_loss".into(), epe(&h, &t, a.loss).map_err(|e| CliError::core(OP, e))?.into());
    }
    run.write("model.json", &(h.to_json() + "\n"))?;
    run.write("metrics.json", &pretty(&metrics))?;
    run.write("metrics.csv", &key_value_csv(&metrics))?;
    run.finish(command)
}

fn grid_for(op: &str, d: &Dataset, feature: &str, points: &Option<Vec<f64>>, max_points: usize) -> Result<Grid> {
    match points {
        Some(p) => Grid::from_points(d, feature, p),
        None => build_grid(d, feature, max_points),
    }
    .map_err(|e| CliError::core(op, e))
}

fn require<'a, T>(op: &str, value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| CliError::usage(op, format!("this question needs --{flag}")))
}

pub fn describe(a: &DescribeArgs, command: &Command) -> Result<()> {
    const OP: &str = "describe";
    let d_eval = load_input(OP, &a.input)?;
    let mut run = RunDir::create(OP, &a.out)?;
    run.input("data", &d_eval);
    let model = a.model.as_ref().map(|p| load_model(OP, p)).transpose()?;
    let core = |e: descry::descriptors::DescriptorError| CliError::core(OP, e);
    let feature_index = |name: &str| d_eval.feature_index(name).map_err(|e| CliError::core(OP, e));
    let model_ref = || require(OP, &model, "model");
    let refit_inputs = || -> Result<(LearnerConfig, Dataset)> {
        let train_path = require(OP, &a.train, "train")?;
        let d_train = load_dataset(OP, train_path, &a.input)?;
        Ok((learner_config(OP, &a.learner, model.as_ref(), a.seed)?, d_train))
    };
    let mut rug_feature = None;
    let result: DescriptorResult = match a.question {
        Question::Cpdp => {
            let name = require(OP, &a.feature, "feature")?;
            let grid = grid_for(OP, &d_eval, name, &a.grid, a.grid_points)?;
            let band = a.band.unwrap_or_else(|| default_band(&d_eval, &grid));
            rug_feature = Some(grid.feature_index);
            cpdp_with_band(model_ref()?, &d_eval, grid.feature_index, &grid, band).map_err(core)?
        }
        Question::Ice => {
            let name = require(OP, &a.feature, "feature")?;
            let grid = grid_for(OP, &d_eval, name, &a.grid, a.grid_points)?;
            rug_feature = Some(grid.feature_index);
            ice(model_ref()?, require(OP, &a.instance, "instance")?, grid.feature_index, &grid, &d_eval).map_err(core)?
        }
        Question::Cpfi => {
            let j = feature_index(require(OP, &a.feature, "feature")?)?;
            let (config, d_train) = refit_inputs()?;
            run.input("train", &d_train);
            cpfi(&config, &d_train, &d_eval, j, a.loss).map_err(core)?
        }
        Question::Sage => {
            let (config, d_train) = refit_inputs()?;
            run.input("train", &d_train);
            run.seed("permutations", a.seed);
            sage(&config, &d_train, &d_eval, a.loss, a.mode, a.permutations, a.seed).map_err(core)?
        }
        Question::ShapleyLocal => {
            let x = require(OP, &a.instance, "instance")?;
            run.seed("permutations", a.seed);
            match a.sampled_k {
                Some(k) => shapley_local_sampled(model_ref()?, &d_eval, x, k, a.mode, a.permutations, a.seed).map_err(core)?,
                None => {
                    let (config, d_train) = refit_inputs()?;
                    run.input("train", &d_train);
                    shapley_local(&config, &d_train, &d_eval, x, a.loss, a.mode, a.permutations, a.seed).map_err(core)?
                }
            }
        }
        Question::LocalConditionalContribution => {
            let j = feature_index(require(OP, &a.feature, "feature")?)?;
            let (config, d_train) = refit_inputs()?;
            run.input("train", &d_train);
            let x = require(OP, &a.instance, "instance")?;
            let y = *require(OP, &a.observed_y, "observed-y")?;
            local_conditional_contribution(&config, &d_train, &d_eval, x, y, j, a.loss).map_err(core)?
        }
        Question::RelevantValueGlobal => {
            let y_rel = *require(OP, &a.y_rel, "y-rel")?;
            relevant_value_global(model_ref()?, &d_eval, y_rel, DEFAULT_PERTURBATIONS).map_err(core)?
        }
        Question::CounterfactualLocal => {
            let x = require(OP, &a.instance, "instance")?;
            let y_rel = *require(OP, &a.y_rel, "y-rel")?;
            let lambda = *require(OP, &a.lambda, "lambda")?;
            counterfactual_local(model_ref()?, &d_eval, x, y_rel, lambda).map_err(core)?
        }
    };

    run.write("result.json", &(result.to_json() + "\n"))?;
    if let Some(report) = &result.diagnostics.sparse_region {
        run.write("sparse_regions.json", &(report.to_json() + "\n"))?;
    }
    let names: Vec<&str> = d_eval.features().iter().map(|f| f.name.as_str()).collect();
    match &result.payload {
        Payload::Curve { points } => {
            run.write("curve.csv", &result.curve_csv().expect("curve payload"))?;
            let x: Vec<f64> = points.iter().map(|p| p.grid_value).collect();
            let y: Vec<f64> = points.iter().map(|p| p.estimate).collect();
            let j = rug_feature.expect("curve questions name a feature");
            let rug = d_eval.column(j);
            let plot = Plot {
                title: format!("{} of {}", a.question.name(), names[j]),
                x_label: names[j].to_string(),
                y_label: "prediction".into(),
                x: &x,
                y: &y,
                bands: Vec::new(),
                rug: &rug,
            };
            run.write("plot.svg", &svg::render(&plot))?;
        }
        Payload::Scalar { value, std_error } => {
            let feature = result.spec.features.first().map_or("", |&j| names[j]);
            let se = std_error.map(|s| s.to_string()).unwrap_or_default();
            run.write("scalar.csv", &format!("question,feature,value,std_error\n{},{feature},{value},{se}\n", a.question.name()))?;
        }
        Payload::Attribution { values, std_errors } => {
            let mut s = String::from("feature,value,std_error\n");
            for (j, v) in values.iter().enumerate() {
                let se = std_errors.as_ref().map(|e| e[j].to_string()).unwrap_or_default();
                writeln!(s, "{},{v},{se}", names[j]).unwrap();
            }
            run.write("attribution.csv", &s)?;
        }
        Payload::Point { x, prediction, .. } => {
            let mut s = String::from("feature,value\n");
            for (f, v) in d_eval.features().iter().zip(x) {
                writeln!(s, "{},{}", f.name, f.format_value(*v)).unwrap();
            }
            writeln!(s, "prediction,{prediction}").unwrap();
            run.write("point.csv", &s)?;
        }
    }
    run.finish(command)
}

pub fn uncertainty(a: &UncertaintyArgs, command: &Command) -> Result<()> {
    const OP: &str = "uncertainty";
    if a.question != Question::Cpdp {
        return Err(CliError::usage(OP, format!("intervals are only available for cpdp, not {}", a.question.name())));
    }
    let d_eval = load_input(OP, &a.input)?;
    let mut run = RunDir::create(OP, &a.out)?;
    run.input("data", &d_eval);
    let model = a.model.as_ref().map(|p| load_model(OP, p)).transpose()?;
    let grid = grid_for(OP, &d_eval, &a.feature, &a.grid, a.grid_points)?;
    let mut target = CurveTarget::with_grid(&d_eval, grid);
    if let Some(b) = a.band {
        target.band = b;
    }
    let core = |e: descry::uncertainty::UncertaintyError| CliError::core(OP, e);
    run.seed("resampling", a.seed);
    let report: UncertaintyReport = match a.mode {
        CiMode::Estimation => {
            let h = require(OP, &model, "model")?;
            let cfg = CIConfig {
                alpha: a.alpha,
                ee_replicates: a.ee_replicates,
                me_replicates: a.me_replicates,
                resample_plan: ResamplePlan::bootstrap(a.ee_replicates, a.seed),
                quantile_family: a.quantile,
            };
            ci_estimation(h, &d_eval, &target, &cfg).map_err(core)?
        }
        CiMode::Combined => {
            let d_train = load_dataset(OP, require(OP, &a.train, "train")?, &a.input)?;
            run.input("train", &d_train);
            let config = learner_config(OP, &a.learner, model.as_ref(), a.seed)?;
            let cfg = CIConfig {
                alpha: a.alpha,
                ee_replicates: a.ee_replicates,
                me_replicates: a.me_replicates,
                resample_plan: ResamplePlan::subsample(a.fit_fraction, a.me_replicates, a.seed),
                quantile_family: a.quantile,
            };
            ci_combined(&config, &d_train, &d_eval, &target, a.loss, &cfg).map_err(core)?
        }
    };
    run.write("report.json", &(report.to_json() + "\n"))?;
    run.write("report.csv", &report.to_csv())?;

    let band = |label: &str, intervals: &[descry::uncertainty::Interval], dash, colour| Band {
        label: label.into(),
        lower: intervals.iter().map(|i| i.lo).collect(),
        upper: intervals.iter().map(|i| i.hi).collect(),
        dash,
        colour,
    };
    let level = format!("{}%", ((1.0 - a.alpha) * 1000.0).round() / 10.0);
    let mut bands = Vec::new();
    if let Some(outer) = &report.ci_me_ee {
        bands.push(band(&format!("{level} CI (model + estimation)"), outer, "8,5", "#d62728"));
    }
    bands.push(band(&format!("{level} CI (estimation)"), &report.ci_ee, "3,3", "#1f77b4"));
    let rug = d_eval.column(target.feature);
    let name = &d_eval.features()[target.feature].name;
    let plot = Plot {
        title: format!("cpdp of {name} with confidence bands"),
        x_label: name.clone(),
        y_label: "prediction".into(),
        x: &report.grid.points,
        y: &report.point_estimates,
        bands,
        rug: &rug,
    };
    run.write("plot.svg", &svg::render(&plot))?;
    run.finish(command)
}
