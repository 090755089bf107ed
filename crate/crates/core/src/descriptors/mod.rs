//! Property descriptors: functionals of a model that answer a formalized
//! question about `P(Y | X)`.
//!
//! | question | operation | model access |
//! |---|---|---|
//! | global effect | [`cpdp`] | conditional group means of `h` |
//! | local effect | [`ice`] | `h(v, x_-p)` on supported points |
//! | global conditional contribution | [`cpfi`] | refits `m_X`, `m_{X_-p}` |
//! | global fair contribution | [`sage`] | refits `m_S` for all `S` |
//! | local fair contribution | [`shapley_local`] | refits `m_S` at the instance |
//! | local conditional contribution | [`local_conditional_contribution`] | refits `m_X`, `m_{X_-p}` |
//! | global relevant value | [`relevant_value_global`] | scan + perturbation |
//! | local relevant value | [`counterfactual_local`] | scan + perturbation |

mod curves;
mod importance;
mod search;
mod shapley;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::models::{LossFunction, ModelError};
use crate::samplers::{SamplerError, SparseRegionReport};

pub use curves::{cpdp, cpdp_curve, cpdp_with_band, ice, ice_with_band};
pub use importance::{
    cpfi, local_conditional_contribution, sage, shapley_local, shapley_local_sampled, subset_epe, Refits,
};
pub use search::{counterfactual_local, perturbations, relevant_value_global, DEFAULT_PERTURBATIONS};
pub use shapley::{shapley_values, ShapleyMode, MAX_EXACT_FEATURES};

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("every grid point was dropped for lack of data")]
    AllGroupsEmpty,
    #[error("instance is outside the data support")]
    OffSupportInstance,
    #[error("exact enumeration supports at most {max} features, got {n}")]
    TooManyFeaturesForExact { n: usize, max: usize },
    #[error("no supported candidate point")]
    NoSupportedCandidate,
    #[error("invalid descriptor spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl DescriptorError {
    pub fn code(&self) -> &'static str {
        match self {
            DescriptorError::AllGroupsEmpty => "AllGroupsEmpty",
            DescriptorError::OffSupportInstance => "OffSupportInstance",
            DescriptorError::TooManyFeaturesForExact { .. } => "TooManyFeaturesForExact",
            DescriptorError::NoSupportedCandidate => "NoSupportedCandidate",
            DescriptorError::InvalidSpec(_) => "InvalidSpec",
            DescriptorError::Model(e) => e.code(),
            DescriptorError::Sampler(e) => e.code(),
            DescriptorError::Data(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, DescriptorError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Cpdp,
    Ice,
    Cpfi,
    Sage,
    ShapleyLocal,
    LocalConditionalContribution,
    RelevantValueGlobal,
    CounterfactualLocal,
}

impl Question {
    pub fn name(self) -> &'static str {
        match self {
            Question::Cpdp => "cpdp",
            Question::Ice => "ice",
            Question::Cpfi => "cpfi",
            Question::Sage => "sage",
            Question::ShapleyLocal => "shapley_local",
            Question::LocalConditionalContribution => "local_conditional_contribution",
            Question::RelevantValueGlobal => "relevant_value_global",
            Question::CounterfactualLocal => "counterfactual_local",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(
            self,
            Question::Ice | Question::ShapleyLocal | Question::LocalConditionalContribution | Question::CounterfactualLocal
        )
    }
}

/// A formalized question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSpec {
    pub question: Question,
    #[serde(default)]
    pub features: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Vec<f64>>,
    pub loss: LossFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ShapleyMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl DescriptorSpec {
    pub fn new(question: Question) -> Self {
        Self {
            question,
            features: Vec::new(),
            instance: None,
            loss: LossFunction::Mse,
            y_rel: None,
            lambda: None,
            observed_y: None,
            mode: None,
            permutations: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DescriptorError::InvalidSpec(format!("{}: {m}", self.question.name())));
        if self.question.is_local() && self.instance.is_none() {
            return bad("local questions need an instance");
        }
        if matches!(self.question, Question::RelevantValueGlobal | Question::CounterfactualLocal) && self.y_rel.is_none() {
            return bad("relevant-value questions need y_rel");
        }
        match (self.question, self.lambda) {
            (Question::CounterfactualLocal, None) => return bad("counterfactuals need lambda"),
            (_, Some(l)) if !(l >= 0.0) => return bad("lambda must be non-negative"),
            _ => {}
        }
        if matches!(self.question, Question::Cpdp | Question::Ice | Question::Cpfi | Question::LocalConditionalContribution)
            && self.features.len() != 1
        {
            return bad("exactly one target feature expected");
        }
        if self.question == Question::LocalConditionalContribution && self.observed_y.is_none() {
            return bad("needs the observed target value");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub grid_value: f64,
    pub estimate: f64,
    pub group_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Curve {
        points: Vec<CurvePoint>,
    },
    Scalar {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        std_error: Option<f64>,
    },
    Attribution {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        std_errors: Option<Vec<f64>>,
    },
    Point {
        x: Vec<f64>,
        prediction: f64,
        /// `|h(x) - y_rel|`.
        prediction_gap: f64,
        /// Gower distance to the instance (counterfactuals only).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distance: Option<f64>,
        objective: f64,
        /// Evaluation row the point came from, if it is not a perturbation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        row_index: Option<usize>,
        candidates: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparse_region: Option<SparseRegionReport>,
    pub sampler: String,
    pub evaluation_size: usize,
    /// Grid points skipped because the spliced point is off support.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub off_support: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorResult {
    pub spec: DescriptorSpec,
    pub payload: Payload,
    pub diagnostics: Diagnostics,
}

impl DescriptorResult {
    pub fn curve(&self) -> Option<&[CurvePoint]> {
        match &self.payload {
            Payload::Curve { points } => Some(points),
            _ => None,
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self.payload {
            Payload::Scalar { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn attribution(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::Attribution { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }

    /// `grid,estimate,group_size,std_error` rows for curve payloads.
    pub fn curve_csv(&self) -> Option<String> {
        let points = self.curve()?;
        let mut out = String::from("grid,estimate,group_size,std_error\n");
        for p in points {
            let se = p.std_error.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", p.grid_value, p.estimate, p.group_size, se));
        }
        Some(out)
    }
}
