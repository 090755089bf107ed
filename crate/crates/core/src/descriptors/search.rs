use rayon::prelude::*;

use super::curves::predictions;
use super::{DescriptorError, DescriptorResult, DescriptorSpec, Diagnostics, Payload, Question, Result};
use crate::data::{Dataset, FeatureKind};
use crate::models::PredictorHandle;
use crate::samplers::{Gower, SupportIndex, DEFAULT_SUPPORT_BAND};

/// Cap on local perturbations generated around one point.
pub const DEFAULT_PERTURBATIONS: usize = 64;

/// Rows whose prediction gap seeds counterfactual perturbations.
const SEED_ROWS: usize = 5;

/// Coordinate-wise moves around `x`: ±1 and ±2 steps per numeric feature
/// (2% of the range, whole units for integers) and every other observed
/// category for categorical features, in feature order, capped at `limit`.
/// Only points passing `support` are kept.
pub fn perturbations(x: &[f64], d: &Dataset, support: &SupportIndex, limit: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    'features: for (j, spec) in d.features().iter().enumerate() {
        let moves: Vec<f64> = match spec.kind {
            FeatureKind::Categorical => {
                let mut cats = d.column(j);
                cats.sort_by(f64::total_cmp);
                cats.dedup();
                cats.into_iter().filter(|&c| c != x[j]).collect()
            }
            FeatureKind::Integer => [-2.0, -1.0, 1.0, 2.0].iter().map(|s| x[j] + s).collect(),
            FeatureKind::Numeric => {
                let step = 0.02 * support.metric.ranges[j];
                [-2.0, -1.0, 1.0, 2.0].iter().map(|s| x[j] + s * step).collect()
            }
        };
        for v in moves {
            if out.len() >= limit {
                break 'features;
            }
            let mut p = x.to_vec();
            p[j] = v;
            if support.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

struct Candidate {
    x: Vec<f64>,
    row_index: Option<usize>,
}

fn spec_for(question: Question, y_rel: f64) -> DescriptorSpec {
    let mut spec = DescriptorSpec::new(question);
    spec.y_rel = Some(y_rel);
    spec
}

/// Most relevant supported point for reaching `y_rel`: the evaluation row
/// minimising `|h(x) - y_rel|` (earliest row on ties), improved by up to
/// `max_perturbations` supported local moves around it.
pub fn relevant_value_global(
    h: &PredictorHandle,
    d_eval: &Dataset,
    y_rel: f64,
    max_perturbations: usize,
) -> Result<DescriptorResult> {
    if d_eval.is_empty() {
        return Err(DescriptorError::InvalidSpec("evaluation data is empty".into()));
    }
    let preds = predictions(h, d_eval)?;
    let mut best = 0;
    for (i, p) in preds.iter().enumerate() {
        if (p - y_rel).abs() < (preds[best] - y_rel).abs() {
            best = i;
        }
    }
    let mut point = d_eval.row(best).to_vec();
    let mut prediction = preds[best];
    let mut row_index = Some(best);
    let support = SupportIndex::new(d_eval, DEFAULT_SUPPORT_BAND);
    let moves = perturbations(&point.clone(), d_eval, &support, max_perturbations);
    for p in &moves {
        let v = h.predict_scalar_row(p)?;
        if (v - y_rel).abs() < (prediction - y_rel).abs() {
            point = p.clone();
            prediction = v;
            row_index = None;
        }
    }
    let gap = (prediction - y_rel).abs();
    Ok(DescriptorResult {
        spec: spec_for(Question::RelevantValueGlobal, y_rel),
        payload: Payload::Point {
            x: point,
            prediction,
            prediction_gap: gap,
            distance: None,
            objective: gap,
            row_index,
            candidates: d_eval.len() + moves.len(),
        },
        diagnostics: Diagnostics { sampler: "support_check".into(), evaluation_size: d_eval.len(), ..Default::default() },
    })
}

/// Supported point `x'` minimising `|h(x') - y_rel| + lambda * gower(x, x')`.
///
/// Candidates, in tie-breaking order: the instance, the evaluation rows,
/// perturbations of the instance and perturbations of the rows with the
/// smallest prediction gaps. The set does not depend on `lambda`.
pub fn counterfactual_local(
    h: &PredictorHandle,
    d_eval: &Dataset,
    instance: &[f64],
    y_rel: f64,
    lambda: f64,
) -> Result<DescriptorResult> {
    if !(lambda >= 0.0) {
        return Err(DescriptorError::InvalidSpec("lambda must be non-negative".into()));
    }
    if d_eval.is_empty() || instance.len() != d_eval.n_features() {
        return Err(DescriptorError::InvalidSpec("instance length does not match the data".into()));
    }
    let support = SupportIndex::new(d_eval, DEFAULT_SUPPORT_BAND);
    if !support.contains(instance) {
        return Err(DescriptorError::OffSupportInstance);
    }
    let preds = predictions(h, d_eval)?;
    let mut candidates = vec![Candidate { x: instance.to_vec(), row_index: None }];
    candidates.extend((0..d_eval.len()).map(|i| Candidate { x: d_eval.row(i).to_vec(), row_index: Some(i) }));
    let mut seeds: Vec<usize> = (0..d_eval.len()).collect();
    seeds.sort_by(|&a, &b| (preds[a] - y_rel).abs().total_cmp(&(preds[b] - y_rel).abs()).then(a.cmp(&b)));
    seeds.truncate(SEED_ROWS);
    let mut origins = vec![instance.to_vec()];
    origins.extend(seeds.iter().map(|&i| d_eval.row(i).to_vec()));
    for o in origins {
        candidates.extend(
            perturbations(&o, d_eval, &support, DEFAULT_PERTURBATIONS)
                .into_iter()
                .map(|x| Candidate { x, row_index: None }),
        );
    }
    let gower = Gower::fit(d_eval);
    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|c| Ok((h.predict_scalar_row(&c.x)?, gower.distance(instance, &c.x))))
        .collect::<Result<_>>()?;
    let objective = |(p, dist): (f64, f64)| (p - y_rel).abs() + lambda * dist;
    let mut best: Option<usize> = None;
    for (i, &s) in scored.iter().enumerate() {
        if best.is_none_or(|b| objective(s) < objective(scored[b])) {
            best = Some(i);
        }
    }
    let b = best.ok_or(DescriptorError::NoSupportedCandidate)?;
    let (prediction, distance) = scored[b];
    let mut spec = spec_for(Question::CounterfactualLocal, y_rel);
    spec.instance = Some(instance.to_vec());
    spec.lambda = Some(lambda);
    Ok(DescriptorResult {
        spec,
        payload: Payload::Point {
            x: candidates[b].x.clone(),
            prediction,
            prediction_gap: (prediction - y_rel).abs(),
            distance: Some(distance),
            objective: objective(scored[b]),
            row_index: candidates[b].row_index,
            candidates: candidates.len(),
        },
        diagnostics: Diagnostics {
            sampler: "support_check".into(),
            evaluation_size: d_eval.len(),
            notes: vec!["d_X = Gower distance, d_Y = absolute difference".into()],
            ..Default::default()
        },
    })
}
