use std::sync::Arc;

use rayon::prelude::*;

use super::shapley::{members, shapley_values};
use super::{DescriptorError, DescriptorResult, DescriptorSpec, Diagnostics, Payload, Question, Result, ShapleyMode};
use crate::data::Dataset;
use crate::models::{epe, pointwise_losses, LearnerConfig, LossFunction, PredictorHandle, SubsetCache};
use crate::samplers::{Gower, SupportIndex, DEFAULT_SUPPORT_BAND};
use crate::stats::{mean, std_error};

/// Subset refits `m_S` of one learner on one training set, memoised.
pub struct Refits<'a> {
    pub config: &'a LearnerConfig,
    pub d_train: &'a Dataset,
    pub loss: LossFunction,
    fingerprint: String,
    cache: Arc<SubsetCache>,
}

impl<'a> Refits<'a> {
    pub fn new(config: &'a LearnerConfig, d_train: &'a Dataset, loss: LossFunction) -> Self {
        Self::with_cache(config, d_train, loss, Arc::new(SubsetCache::new()))
    }

    pub fn with_cache(config: &'a LearnerConfig, d_train: &'a Dataset, loss: LossFunction, cache: Arc<SubsetCache>) -> Self {
        Self { config, d_train, loss, fingerprint: d_train.fingerprint(), cache }
    }

    pub fn model(&self, subset: &[usize]) -> Result<Arc<PredictorHandle>> {
        Ok(self.cache.get_or_train(self.config, self.d_train, &self.fingerprint, self.loss, subset)?)
    }

    pub fn cache(&self) -> &SubsetCache {
        &self.cache
    }

    pub fn n_features(&self) -> usize {
        self.d_train.n_features()
    }

    fn all(&self) -> Vec<usize> {
        (0..self.n_features()).collect()
    }

    fn without(&self, feature: usize) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| j != feature).collect()
    }
}

/// Evaluation EPE of the refit `m_S`.
pub fn subset_epe(refits: &Refits, d_eval: &Dataset, subset: &[usize]) -> Result<f64> {
    Ok(epe(&*refits.model(subset)?, d_eval, refits.loss)?)
}

fn check_layout(d_train: &Dataset, d_eval: &Dataset) -> Result<()> {
    let names = |d: &Dataset| d.features().iter().map(|f| f.name.clone()).collect::<Vec<_>>();
    if names(d_train) != names(d_eval) {
        return Err(DescriptorError::InvalidSpec("training and evaluation data have different features".into()));
    }
    if d_eval.is_empty() {
        return Err(DescriptorError::InvalidSpec("evaluation data is empty".into()));
    }
    Ok(())
}

fn check_instance(d_eval: &Dataset, instance: &[f64]) -> Result<()> {
    if instance.len() != d_eval.n_features() {
        return Err(DescriptorError::InvalidSpec("instance length does not match the data".into()));
    }
    if !SupportIndex::new(d_eval, DEFAULT_SUPPORT_BAND).contains(instance) {
        return Err(DescriptorError::OffSupportInstance);
    }
    Ok(())
}

/// Conditional feature importance in refit form:
/// `EPE(m_{X_-p}) - EPE(m_X)` on the evaluation data, with the paired
/// standard error of the per-row loss differences.
pub fn cpfi(
    config: &LearnerConfig,
    d_train: &Dataset,
    d_eval: &Dataset,
    feature: usize,
    loss: LossFunction,
) -> Result<DescriptorResult> {
    check_layout(d_train, d_eval)?;
    let n = d_train.n_features();
    if n < 2 {
        return Err(DescriptorError::InvalidSpec("cpfi needs at least two features".into()));
    }
    if feature >= n {
        return Err(DescriptorError::InvalidSpec(format!("feature index {feature} out of range")));
    }
    let refits = Refits::new(config, d_train, loss);
    let full = pointwise_losses(&*refits.model(&refits.all())?, d_eval, loss)?;
    let reduced = pointwise_losses(&*refits.model(&refits.without(feature))?, d_eval, loss)?;
    let diff: Vec<f64> = reduced.iter().zip(&full).map(|(r, f)| r - f).collect();
    let mut spec = DescriptorSpec::new(Question::Cpfi);
    spec.features = vec![feature];
    spec.loss = loss;
    Ok(DescriptorResult {
        spec,
        payload: Payload::Scalar { value: mean(&diff), std_error: Some(std_error(&diff)) },
        diagnostics: Diagnostics {
            sampler: "refit".into(),
            evaluation_size: d_eval.len(),
            notes: vec![format!("learner {}", config.name())],
            ..Default::default()
        },
    })
}

/// Shapley decomposition of the EPE reduction `EPE(m_∅) - EPE(m_X)` over
/// features; positive values mean the feature lowers the error.
pub fn sage(
    config: &LearnerConfig,
    d_train: &Dataset,
    d_eval: &Dataset,
    loss: LossFunction,
    mode: ShapleyMode,
    mc_permutations: usize,
    seed: u64,
) -> Result<DescriptorResult> {
    check_layout(d_train, d_eval)?;
    let refits = Refits::new(config, d_train, loss);
    let n = refits.n_features();
    let (values, std_errors) =
        shapley_values(n, mode, mc_permutations, seed, |m| Ok(-subset_epe(&refits, d_eval, &members(m, n))?))?;
    let mut spec = DescriptorSpec::new(Question::Sage);
    spec.features = (0..n).collect();
    spec.loss = loss;
    spec.mode = Some(mode);
    spec.permutations = (mode == ShapleyMode::PermutationMc).then_some(mc_permutations);
    spec.seed = seed;
    Ok(DescriptorResult {
        spec,
        payload: Payload::Attribution { values, std_errors },
        diagnostics: Diagnostics {
            sampler: "refit".into(),
            evaluation_size: d_eval.len(),
            notes: vec![format!("{} subset models trained", refits.cache().trained())],
            ..Default::default()
        },
    })
}

fn local_spec(question: Question, instance: &[f64], loss: LossFunction, mode: ShapleyMode, permutations: usize, seed: u64) -> DescriptorSpec {
    let mut spec = DescriptorSpec::new(question);
    spec.features = (0..instance.len()).collect();
    spec.instance = Some(instance.to_vec());
    spec.loss = loss;
    spec.mode = Some(mode);
    spec.permutations = (mode == ShapleyMode::PermutationMc).then_some(permutations);
    spec.seed = seed;
    spec
}

/// Local Shapley values with the refit value function
/// `v(S) = m_S(x_S)`; efficiency gives `sum(phi) = m_X(x) - m_∅`.
#[allow(clippy::too_many_arguments)]
pub fn shapley_local(
    config: &LearnerConfig,
    d_train: &Dataset,
    d_eval: &Dataset,
    instance: &[f64],
    loss: LossFunction,
    mode: ShapleyMode,
    mc_permutations: usize,
    seed: u64,
) -> Result<DescriptorResult> {
    check_layout(d_train, d_eval)?;
    check_instance(d_eval, instance)?;
    let refits = Refits::new(config, d_train, loss);
    let n = refits.n_features();
    let (values, std_errors) = shapley_values(n, mode, mc_permutations, seed, |m| {
        Ok(refits.model(&members(m, n))?.predict_scalar_row(instance)?)
    })?;
    Ok(DescriptorResult {
        spec: local_spec(Question::ShapleyLocal, instance, loss, mode, mc_permutations, seed),
        payload: Payload::Attribution { values, std_errors },
        diagnostics: Diagnostics {
            sampler: "refit".into(),
            evaluation_size: d_eval.len(),
            ..Default::default()
        },
    })
}

/// Local Shapley values with `m_S(x_S)` approximated by averaging the full
/// model over the `knn_k` evaluation rows nearest to `x_S` (Gower), with
/// their `S` coordinates set to `x_S`. Needs no refits.
pub fn shapley_local_sampled(
    h: &PredictorHandle,
    d_eval: &Dataset,
    instance: &[f64],
    knn_k: usize,
    mode: ShapleyMode,
    mc_permutations: usize,
    seed: u64,
) -> Result<DescriptorResult> {
    check_instance(d_eval, instance)?;
    if knn_k == 0 || knn_k > d_eval.len() {
        return Err(DescriptorError::InvalidSpec(format!("knn_k must lie in 1..={}", d_eval.len())));
    }
    let n = d_eval.n_features();
    let gower = Gower::fit(d_eval);
    let value = |m: u64| -> Result<f64> {
        let s = members(m, n);
        let rows: Vec<usize> = if s.is_empty() {
            (0..d_eval.len()).collect()
        } else {
            let restricted = |x: &[f64]| s.iter().map(|&j| x[j]).collect::<Vec<_>>();
            let target = restricted(instance);
            let metric = Gower {
                ranges: s.iter().map(|&j| gower.ranges[j]).collect(),
                categorical: s.iter().map(|&j| gower.categorical[j]).collect(),
            };
            let dist: Vec<f64> = d_eval.rows().iter().map(|r| metric.distance(&restricted(r), &target)).collect();
            let mut order: Vec<usize> = (0..d_eval.len()).collect();
            order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            order.truncate(knn_k);
            order
        };
        let preds = rows
            .par_iter()
            .map(|&i| {
                let mut x = d_eval.row(i).to_vec();
                for &j in &s {
                    x[j] = instance[j];
                }
                h.predict_scalar_row(&x).map_err(DescriptorError::from)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(mean(&preds))
    };
    let (values, std_errors) = shapley_values(n, mode, mc_permutations, seed, value)?;
    Ok(DescriptorResult {
        spec: local_spec(Question::ShapleyLocal, instance, LossFunction::Mse, mode, mc_permutations, seed),
        payload: Payload::Attribution { values, std_errors },
        diagnostics: Diagnostics {
            sampler: format!("conditional_sampling_approximation(knn_k={knn_k})"),
            evaluation_size: d_eval.len(),
            notes: vec!["m_S(x_S) approximated by the conditional average of the full model".into()],
            ..Default::default()
        },
    })
}

/// `L(y, m_{X_-p}(x_-p)) - L(y, m_X(x))` at one observed instance;
/// positive when knowing `x_p` lowers the instance loss.
#[allow(clippy::too_many_arguments)]
pub fn local_conditional_contribution(
    config: &LearnerConfig,
    d_train: &Dataset,
    d_eval: &Dataset,
    instance: &[f64],
    observed_y: f64,
    feature: usize,
    loss: LossFunction,
) -> Result<DescriptorResult> {
    check_layout(d_train, d_eval)?;
    check_instance(d_eval, instance)?;
    if feature >= d_train.n_features() {
        return Err(DescriptorError::InvalidSpec(format!("feature index {feature} out of range")));
    }
    let refits = Refits::new(config, d_train, loss);
    let full = loss.loss(observed_y, &refits.model(&refits.all())?.predict_row(instance)?)?;
    let reduced = loss.loss(observed_y, &refits.model(&refits.without(feature))?.predict_row(instance)?)?;
    let mut spec = DescriptorSpec::new(Question::LocalConditionalContribution);
    spec.features = vec![feature];
    spec.instance = Some(instance.to_vec());
    spec.observed_y = Some(observed_y);
    spec.loss = loss;
    Ok(DescriptorResult {
        spec,
        payload: Payload::Scalar { value: reduced - full, std_error: None },
        diagnostics: Diagnostics {
            sampler: "refit".into(),
            evaluation_size: d_eval.len(),
            notes: vec![format!("reduced loss {reduced}, full loss {full}")],
            ..Default::default()
        },
    })
}
