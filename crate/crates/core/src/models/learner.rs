use serde::{Deserialize, Serialize};

use super::knn::KnnModel;
use super::{best_constant, linear, mlp, KnnDistance, KnnTask, LossFunction, Metadata, Model, ModelError, PredictorHandle};
use crate::data::{Dataset, FeatureKind};

/// Hyperparameters of the dense network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer widths; at least one layer.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// Factor applied to the learning rate after an epoch that would
    /// increase the training loss.
    pub decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden: vec![32, 16, 8], learning_rate: 0.01, decay: 0.5, epochs: 300, batch_size: 32, seed: 0 }
    }
}

/// A learning algorithm with fixed hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerConfig {
    Ols,
    Knn { k: usize, distance: KnnDistance },
    Mlp(MlpConfig),
    /// Best constant for the loss (mean, median or mode); ignores features.
    Constant,
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Ols => "ols",
            LearnerConfig::Knn { .. } => "knn",
            LearnerConfig::Mlp(_) => "mlp",
            LearnerConfig::Constant => "constant",
        }
    }

    /// Canonical string used as a cache key.
    pub fn key(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            LearnerConfig::Mlp(c) => Some(c.seed),
            _ => None,
        }
    }

    /// The same learner with its training seed replaced; seedless learners
    /// are returned unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            LearnerConfig::Mlp(c) => LearnerConfig::Mlp(MlpConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }

    fn check(&self, d: &Dataset, loss: LossFunction) -> Result<(), ModelError> {
        let incompatible = || ModelError::IncompatibleLoss { loss, what: format!("learner `{}`", self.name()) };
        match self {
            LearnerConfig::Ols | LearnerConfig::Mlp(_) if loss != LossFunction::Mse => return Err(incompatible()),
            LearnerConfig::Knn { .. } if !matches!(loss, LossFunction::Mse | LossFunction::ZeroOne) => {
                return Err(incompatible())
            }
            LearnerConfig::Knn { k, .. } if *k == 0 || *k > d.len() => {
                return Err(ModelError::InvalidConfig(format!("knn k={k} with {} training rows", d.len())))
            }
            LearnerConfig::Mlp(c) if c.hidden.is_empty() || c.hidden.contains(&0) => {
                return Err(ModelError::InvalidConfig("mlp needs at least one non-empty hidden layer".into()))
            }
            LearnerConfig::Mlp(c) if !(c.learning_rate > 0.0 && c.decay > 0.0 && c.decay < 1.0) => {
                return Err(ModelError::InvalidConfig("mlp needs learning_rate > 0 and decay in (0, 1)".into()))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Runs the learning algorithm on `d`.
///
/// Deterministic given the configuration (the MLP carries its own seed).
pub fn train(config: &LearnerConfig, d: &Dataset, loss: LossFunction) -> Result<PredictorHandle, ModelError> {
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    config.check(d, loss)?;
    let mut metadata = Metadata {
        learner: config.name().into(),
        hyperparameters: serde_json::to_value(config).expect("config serializes"),
        seed: config.seed(),
        training_loss: Vec::new(),
    };
    let model = match config {
        LearnerConfig::Ols => linear::fit_ols(d)?,
        LearnerConfig::Knn { k, distance } => {
            let task = match loss {
                LossFunction::ZeroOne => KnnTask::Classification { classes: class_count(d) },
                _ => KnnTask::Regression,
            };
            Model::Knn(KnnModel::fit(d, *k, *distance, task))
        }
        LearnerConfig::Mlp(cfg) => {
            let (m, history) = mlp::fit(d, cfg);
            metadata.training_loss = history;
            Model::Mlp(m)
        }
        LearnerConfig::Constant => best_constant(d, loss)?,
    };
    Ok(PredictorHandle::over_dataset(d, model, metadata))
}

pub(crate) fn class_count(d: &Dataset) -> usize {
    match (&d.target().kind, &d.target().categories) {
        (FeatureKind::Categorical, Some(c)) => c.len(),
        _ => d.targets().iter().fold(0.0f64, |m, &y| m.max(y)) as usize + 1,
    }
}
