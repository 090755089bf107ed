//! Predictors, learners and losses.
//!
//! Every model, trained or analytic, is exposed as a [`PredictorHandle`]: a
//! pure function from the feature vector of its input schema to a
//! [`Prediction`]. A handle also remembers which columns of the source
//! dataset it consumes, so subset models `m_S` can be evaluated directly on
//! full evaluation rows with [`PredictorHandle::predict_row`].

mod encode;
mod knn;
mod learner;
mod linear;
mod mlp;
mod subset;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, FeatureSpec};

pub use encode::Encoder;
pub use knn::{KnnDistance, KnnTask};
pub use learner::{train, LearnerConfig, MlpConfig};
pub use mlp::DenseLayer;
pub use subset::{best_constant, subset_model, SubsetCache};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("design matrix is singular even with ridge fallback")]
    SingularDesign,
    #[error("loss {loss:?} is incompatible with {what}")]
    IncompatibleLoss { loss: LossFunction, what: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("input lies outside the model's support: {0}")]
    OutsideSupport(String),
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error("empty dataset")]
    EmptyDataset,
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::SingularDesign => "SingularDesign",
            ModelError::IncompatibleLoss { .. } => "IncompatibleLoss",
            ModelError::SchemaMismatch(_) => "SchemaMismatch",
            ModelError::OutsideSupport(_) => "OutsideSupport",
            ModelError::InvalidConfig(_) => "InvalidConfig",
            ModelError::EmptyDataset => "EmptyDataset",
        }
    }
}

/// Loss functions and their optimal predictors:
/// MSE → conditional mean, MAE → conditional median,
/// 0-1 → conditional mode, KL → the conditional distribution itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFunction {
    #[serde(alias = "MSE")]
    Mse,
    #[serde(alias = "MAE")]
    Mae,
    #[serde(alias = "0-1", alias = "zero-one")]
    ZeroOne,
    #[serde(alias = "KL")]
    Kl,
}

impl LossFunction {
    pub fn is_regression(self) -> bool {
        matches!(self, LossFunction::Mse | LossFunction::Mae)
    }

    /// `L(y, prediction)`.
    ///
    /// For KL the observed label is read as a point mass, so the forward
    /// divergence reduces to `-ln q(y)`.
    pub fn loss(self, y: f64, prediction: &Prediction) -> Result<f64, ModelError> {
        match (self, prediction) {
            (LossFunction::Mse, Prediction::Scalar(p)) => Ok((y - p) * (y - p)),
            (LossFunction::Mae, Prediction::Scalar(p)) => Ok((y - p).abs()),
            (LossFunction::ZeroOne, Prediction::Scalar(p)) => Ok(if *p == y { 0.0 } else { 1.0 }),
            (LossFunction::ZeroOne, Prediction::Distribution(q)) => {
                Ok(if argmax(q) as f64 == y { 0.0 } else { 1.0 })
            }
            (LossFunction::Kl, Prediction::Distribution(q)) => {
                let qy = q.get(y as usize).copied().unwrap_or(0.0);
                Ok(-(qy.max(1e-12)).ln())
            }
            (loss, p) => Err(ModelError::IncompatibleLoss { loss, what: format!("{} output", p.kind_name()) }),
        }
    }

    /// Pointwise discrepancy `L(m1(x), m2(x))` used by the model-space metric.
    pub fn divergence(self, a: &Prediction, b: &Prediction) -> Result<f64, ModelError> {
        match (self, a, b) {
            (LossFunction::Mse, Prediction::Scalar(x), Prediction::Scalar(y)) => Ok((x - y) * (x - y)),
            (LossFunction::Mae, Prediction::Scalar(x), Prediction::Scalar(y)) => Ok((x - y).abs()),
            (LossFunction::ZeroOne, _, _) => {
                Ok(if a.label() == b.label() { 0.0 } else { 1.0 })
            }
            (LossFunction::Kl, Prediction::Distribution(p), Prediction::Distribution(q)) => Ok(p
                .iter()
                .zip(q)
                .filter(|(pi, _)| **pi > 0.0)
                .map(|(pi, qi)| pi * (pi / qi.max(1e-12)).ln())
                .sum()),
            (loss, _, _) => Err(ModelError::IncompatibleLoss { loss, what: "these prediction kinds".into() }),
        }
    }
}

pub(crate) fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate() {
        if v > q[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Scalar(f64),
    /// Probabilities over the target's label set.
    Distribution(Vec<f64>),
}

impl Prediction {
    pub fn scalar(&self) -> Result<f64, ModelError> {
        match self {
            Prediction::Scalar(v) => Ok(*v),
            Prediction::Distribution(_) => {
                Err(ModelError::SchemaMismatch("expected a scalar prediction, got a distribution".into()))
            }
        }
    }

    /// Predicted label: the value itself, or the mode of a distribution.
    pub fn label(&self) -> f64 {
        match self {
            Prediction::Scalar(v) => *v,
            Prediction::Distribution(q) => argmax(q) as f64,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Prediction::Scalar(_) => "scalar",
            Prediction::Distribution(_) => "distribution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Scalar,
    Distribution,
}

/// One monomial `coefficient * prod x[i]^p` of a [`Model::Polynomial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coefficient: f64,
    pub powers: Vec<(usize, u32)>,
}

/// Parameters of a predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Constant {
        value: f64,
    },
    ConstantDistribution {
        probabilities: Vec<f64>,
    },
    Linear {
        encoder: Encoder,
        intercept: f64,
        coefficients: Vec<f64>,
    },
    Polynomial {
        intercept: f64,
        terms: Vec<PolyTerm>,
    },
    Knn(knn::KnnModel),
    Mlp(mlp::MlpModel),
    /// Lookup table over a finite support; rows of `conditionals` are
    /// `P(Y | x)` for the matching support point.
    Table {
        support: Vec<Vec<f64>>,
        conditionals: Vec<Vec<f64>>,
        output: OutputKind,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub learner: String,
    #[serde(default)]
    pub hyperparameters: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Per-epoch training loss, for iterative learners.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub training_loss: Vec<f64>,
}

/// A deterministic mapping from feature vectors to predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorHandle {
    /// Features consumed, in evaluation order.
    pub input_schema: Vec<FeatureSpec>,
    /// Position of each input feature in the source dataset.
    pub columns: Vec<usize>,
    pub output_kind: OutputKind,
    pub model: Model,
    pub metadata: Metadata,
}

impl PredictorHandle {
    pub fn new(input_schema: Vec<FeatureSpec>, columns: Vec<usize>, model: Model, metadata: Metadata) -> Self {
        let output_kind = match &model {
            Model::ConstantDistribution { .. } => OutputKind::Distribution,
            Model::Table { output, .. } => *output,
            _ => OutputKind::Scalar,
        };
        Self { input_schema, columns, output_kind, model, metadata }
    }

    /// Handle over all features of `d`, in order.
    pub fn over_dataset(d: &Dataset, model: Model, metadata: Metadata) -> Self {
        Self::new(d.features().to_vec(), (0..d.n_features()).collect(), model, metadata)
    }

    pub fn n_inputs(&self) -> usize {
        self.input_schema.len()
    }

    /// Evaluates the model on a vector matching `input_schema`.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, ModelError> {
        if x.len() != self.input_schema.len() {
            return Err(ModelError::SchemaMismatch(format!(
                "expected {} inputs, got {}",
                self.input_schema.len(),
                x.len()
            )));
        }
        Ok(match &self.model {
            Model::Constant { value } => Prediction::Scalar(*value),
            Model::ConstantDistribution { probabilities } => Prediction::Distribution(probabilities.clone()),
            Model::Linear { encoder, intercept, coefficients } => {
                let z = encoder.encode(x);
                Prediction::Scalar(intercept + z.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
            }
            Model::Polynomial { intercept, terms } => Prediction::Scalar(
                intercept
                    + terms
                        .iter()
                        .map(|t| t.coefficient * t.powers.iter().map(|&(i, p)| x[i].powi(p as i32)).product::<f64>())
                        .sum::<f64>(),
            ),
            Model::Knn(m) => Prediction::Scalar(m.predict(x)),
            Model::Mlp(m) => Prediction::Scalar(m.predict(x)),
            Model::Table { support, conditionals, output } => {
                let i = support
                    .iter()
                    .position(|s| s.as_slice() == x)
                    .ok_or_else(|| ModelError::OutsideSupport(format!("{x:?} is not a support point")))?;
                match output {
                    OutputKind::Distribution => Prediction::Distribution(conditionals[i].clone()),
                    OutputKind::Scalar => Prediction::Scalar(argmax(&conditionals[i]) as f64),
                }
            }
        })
    }

    /// Evaluates on a full source row, picking out [`Self::columns`].
    pub fn predict_row(&self, row: &[f64]) -> Result<Prediction, ModelError> {
        let x = self.project(row)?;
        self.predict(&x)
    }

    pub fn predict_scalar_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        self.predict_row(row)?.scalar()
    }

    pub fn project(&self, row: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.columns
            .iter()
            .map(|&c| {
                row.get(c)
                    .copied()
                    .ok_or_else(|| ModelError::SchemaMismatch(format!("row has no column {c}")))
            })
            .collect()
    }

    /// Checks that `d` carries this handle's inputs at the recorded columns.
    pub fn check_dataset(&self, d: &Dataset) -> Result<(), ModelError> {
        for (spec, &c) in self.input_schema.iter().zip(&self.columns) {
            match d.features().get(c) {
                Some(f) if f.name == spec.name => {}
                Some(f) => {
                    return Err(ModelError::SchemaMismatch(format!(
                        "column {c} is `{}`, model expects `{}`",
                        f.name, spec.name
                    )))
                }
                None => return Err(ModelError::SchemaMismatch(format!("dataset has no column {c}"))),
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("handles serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Empirical expected prediction error: mean loss over the rows of `d`.
pub fn epe(h: &PredictorHandle, d: &Dataset, loss: LossFunction) -> Result<f64, ModelError> {
    Ok(crate::stats::mean(&pointwise_losses(h, d, loss)?))
}

/// Per-row losses of `h` on `d`.
pub fn pointwise_losses(h: &PredictorHandle, d: &Dataset, loss: LossFunction) -> Result<Vec<f64>, ModelError> {
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    h.check_dataset(d)?;
    d.rows()
        .iter()
        .zip(d.targets())
        .map(|(row, &y)| loss.loss(y, &h.predict_row(row)?))
        .collect()
}

/// Monte Carlo estimate of `d_M(h1, h2) = E_X[L(h1(X), h2(X))]` over the
/// empirical feature distribution of `d`.
pub fn model_distance(
    h1: &PredictorHandle,
    h2: &PredictorHandle,
    d: &Dataset,
    loss: LossFunction,
) -> Result<f64, ModelError> {
    let names = |h: &PredictorHandle| h.input_schema.iter().map(|f| f.name.clone()).collect::<Vec<_>>();
    if names(h1) != names(h2) {
        return Err(ModelError::SchemaMismatch("handles consume different features".into()));
    }
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    h1.check_dataset(d)?;
    let total = d
        .rows()
        .iter()
        .map(|row| loss.divergence(&h1.predict_row(row)?, &h2.predict_row(row)?))
        .sum::<Result<f64, ModelError>>()?;
    Ok(total / d.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;

    pub(crate) fn line_data(xs: &[f64], f: impl Fn(f64) -> f64) -> Dataset {
        Dataset::new(
            vec![FeatureSpec::numeric("x")],
            FeatureSpec::numeric("y"),
            xs.iter().map(|&x| vec![x]).collect(),
            xs.iter().map(|&x| f(x)).collect(),
            Provenance::Synthetic,
            None,
        )
        .unwrap()
    }

    fn constant(d: &Dataset, v: f64) -> PredictorHandle {
        PredictorHandle::over_dataset(d, Model::Constant { value: v }, Metadata::default())
    }

    #[test]
    fn linear_handle_at_centered_zero() {
        let d = line_data(&[0.0], |x| x);
        let h = PredictorHandle::over_dataset(
            &d,
            Model::Linear { encoder: Encoder::identity(1), intercept: 10.46, coefficients: vec![0.77] },
            Metadata::default(),
        );
        assert_eq!(h.predict(&[0.0]).unwrap(), Prediction::Scalar(10.46));
        assert_eq!(h.predict(&[2.0]).unwrap(), h.predict(&[2.0]).unwrap());
        assert!(matches!(h.predict(&[1.0, 2.0]), Err(ModelError::SchemaMismatch(_))));
    }

    #[test]
    fn epe_arithmetic() {
        let d = line_data(&[0.0, 1.0, 2.0, 3.0], |x| (x as i64 % 2) as f64);
        assert_eq!(epe(&constant(&d, 0.5), &d, LossFunction::Mse).unwrap(), 0.25);
        let perfect = line_data(&[1.0, 2.0], |x| 3.0 * x);
        let h = PredictorHandle::over_dataset(
            &perfect,
            Model::Linear { encoder: Encoder::identity(1), intercept: 0.0, coefficients: vec![3.0] },
            Metadata::default(),
        );
        assert_eq!(epe(&h, &perfect, LossFunction::Mse).unwrap(), 0.0);
        assert!(matches!(
            epe(&h, &perfect, LossFunction::Kl),
            Err(ModelError::IncompatibleLoss { .. })
        ));
    }

    #[test]
    fn distance_between_constants() {
        let d = line_data(&[0.0, 1.0, 5.0], |x| x);
        let (a, b) = (constant(&d, 1.0), constant(&d, 3.0));
        assert_eq!(model_distance(&a, &b, &d, LossFunction::Mse).unwrap(), 4.0);
        assert_eq!(model_distance(&a, &a, &d, LossFunction::Mse).unwrap(), 0.0);
        assert_eq!(
            model_distance(&a, &b, &d, LossFunction::Mae).unwrap(),
            model_distance(&b, &a, &d, LossFunction::Mae).unwrap()
        );
    }

    #[test]
    fn kl_loss_and_divergence() {
        let q = Prediction::Distribution(vec![0.25, 0.75]);
        assert!((LossFunction::Kl.loss(1.0, &q).unwrap() - (-(0.75f64).ln())).abs() < 1e-15);
        assert_eq!(LossFunction::ZeroOne.loss(1.0, &q).unwrap(), 0.0);
        assert_eq!(LossFunction::Kl.divergence(&q, &q).unwrap(), 0.0);
    }

    #[test]
    fn handle_json_roundtrip() {
        let d = line_data(&[0.0], |x| x);
        let h = PredictorHandle::over_dataset(
            &d,
            Model::Linear { encoder: Encoder::identity(1), intercept: 1.5, coefficients: vec![-2.0] },
            Metadata { learner: "ols".into(), ..Default::default() },
        );
        let back = PredictorHandle::from_json(&h.to_json()).unwrap();
        assert_eq!(back, h);
    }
}
