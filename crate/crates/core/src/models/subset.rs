//! Refits on feature subsets, `m_S` for `S ⊆ {0..n}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use once_cell::sync::OnceCell;

use super::learner::class_count;
use super::{train, LearnerConfig, LossFunction, Metadata, Model, ModelError, PredictorHandle};
use crate::data::Dataset;

/// Best constant prediction under `loss`: mean (MSE), median (MAE), modal
/// label (0-1) or label frequencies (KL).
pub fn best_constant(d: &Dataset, loss: LossFunction) -> Result<Model, ModelError> {
    if d.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let y = d.targets();
    Ok(match loss {
        LossFunction::Mse => Model::Constant { value: crate::stats::mean(y) },
        LossFunction::Mae => Model::Constant { value: crate::stats::median(y) },
        LossFunction::ZeroOne | LossFunction::Kl => {
            let mut counts = vec![0usize; class_count(d)];
            for &v in y {
                counts[v as usize] += 1;
            }
            if loss == LossFunction::ZeroOne {
                Model::Constant { value: super::argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>()) as f64 }
            } else {
                Model::ConstantDistribution {
                    probabilities: counts.iter().map(|&c| c as f64 / y.len() as f64).collect(),
                }
            }
        }
    })
}

/// Retrains `config` on the columns `subset` of `d`.
///
/// The empty subset yields [`best_constant`]. The returned handle reads its
/// inputs from the original column positions, so it can be evaluated on full
/// rows of `d` (or of any dataset with the same layout).
pub fn subset_model(
    config: &LearnerConfig,
    d: &Dataset,
    loss: LossFunction,
    subset: &[usize],
) -> Result<PredictorHandle, ModelError> {
    if let Some(&bad) = subset.iter().find(|&&j| j >= d.n_features()) {
        return Err(ModelError::SchemaMismatch(format!("feature index {bad} out of range")));
    }
    if subset.is_empty() {
        let model = best_constant(d, loss)?;
        let metadata = Metadata { learner: format!("{}/empty-subset", config.name()), ..Default::default() };
        return Ok(PredictorHandle::new(Vec::new(), Vec::new(), model, metadata));
    }
    let mut h = train(config, &d.select_features(subset), loss)?;
    h.columns = subset.to_vec();
    Ok(h)
}

type Key = (String, String, LossFunction, Vec<usize>);

/// Thread-safe memo of subset refits keyed by (learner, dataset fingerprint,
/// loss, subset). Concurrent requests for the same key train once.
#[derive(Default)]
pub struct SubsetCache {
    entries: Mutex<HashMap<Key, Arc<OnceCell<Arc<PredictorHandle>>>>>,
    trained: AtomicUsize,
    requests: AtomicUsize,
}

impl SubsetCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cached [`subset_model`]. `fingerprint` must be `d.fingerprint()`; it is
    /// passed in so callers can hash large datasets once.
    pub fn get_or_train(
        &self,
        config: &LearnerConfig,
        d: &Dataset,
        fingerprint: &str,
        loss: LossFunction,
        subset: &[usize],
    ) -> Result<Arc<PredictorHandle>, ModelError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        let key = (config.key(), fingerprint.to_string(), loss, s.clone());
        let cell = {
            let mut map = self.entries.lock().expect("cache lock");
            map.entry(key).or_default().clone()
        };
        cell.get_or_try_init(|| {
            self.trained.fetch_add(1, Ordering::Relaxed);
            subset_model(config, d, loss, &s).map(Arc::new)
        })
        .cloned()
    }

    /// Number of models actually trained.
    pub fn trained(&self) -> usize {
        self.trained.load(Ordering::Relaxed)
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureSpec, Provenance};
    use crate::models::Prediction;
    use rayon::prelude::*;

    fn two_feature() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect();
        let targets = rows.iter().map(|r| 1.0 + 2.0 * r[0] - r[1]).collect();
        Dataset::new(
            vec![FeatureSpec::numeric("a"), FeatureSpec::numeric("b")],
            FeatureSpec::numeric("y"),
            rows,
            targets,
            Provenance::Synthetic,
            None,
        )
        .unwrap()
    }

    #[test]
    fn full_subset_equals_train() {
        let d = two_feature();
        let full = subset_model(&LearnerConfig::Ols, &d, LossFunction::Mse, &[0, 1]).unwrap();
        let direct = train(&LearnerConfig::Ols, &d, LossFunction::Mse).unwrap();
        for row in d.rows() {
            assert_eq!(full.predict_row(row).unwrap(), direct.predict_row(row).unwrap());
        }
    }

    #[test]
    fn empty_subset_is_best_constant() {
        let d = two_feature();
        let h = subset_model(&LearnerConfig::Ols, &d, LossFunction::Mse, &[]).unwrap();
        let ybar = crate::stats::mean(d.targets());
        assert_eq!(h.predict_row(d.row(3)).unwrap(), Prediction::Scalar(ybar));
        let med = subset_model(&LearnerConfig::Constant, &d, LossFunction::Mae, &[]).unwrap();
        assert_eq!(med.predict(&[]).unwrap(), Prediction::Scalar(crate::stats::median(d.targets())));
    }

    #[test]
    fn reduced_model_reads_original_columns() {
        let d = two_feature();
        let h = subset_model(&LearnerConfig::Ols, &d, LossFunction::Mse, &[1]).unwrap();
        assert_eq!(h.columns, vec![1]);
        assert_eq!(h.input_schema[0].name, "b");
        let p = h.predict_row(&[1000.0, 3.0]).unwrap();
        assert_eq!(p, h.predict(&[3.0]).unwrap());
    }

    #[test]
    fn cache_trains_once_under_contention() {
        let d = two_feature();
        let fp = d.fingerprint();
        let cache = SubsetCache::new();
        let handles: Vec<_> = (0..32)
            .into_par_iter()
            .map(|i| cache.get_or_train(&LearnerConfig::Ols, &d, &fp, LossFunction::Mse, &[i % 2]).unwrap())
            .collect();
        assert_eq!(cache.trained(), 2);
        assert_eq!(cache.requests(), 32);
        assert_eq!(handles[0], handles[2]);
    }
}
