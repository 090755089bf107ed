use rayon::prelude::*;

use super::{CurvePoint, DescriptorError, DescriptorResult, DescriptorSpec, Diagnostics, Payload, Question, Result};
use crate::data::Dataset;
use crate::models::PredictorHandle;
use crate::samplers::{conditional_groups, default_band, Grid, SupportIndex, DEFAULT_SUPPORT_BAND};
use crate::stats::{mean, std_error};

fn check_grid(d: &Dataset, feature: usize, grid: &Grid) -> Result<()> {
    if d.is_empty() {
        return Err(DescriptorError::InvalidSpec("evaluation data is empty".into()));
    }
    if feature >= d.n_features() || grid.feature_index != feature {
        return Err(DescriptorError::InvalidSpec(format!(
            "grid is over feature {}, descriptor asks for {feature}",
            grid.feature_index
        )));
    }
    Ok(())
}

/// Scalar predictions of `h` on every row of `d`.
pub(crate) fn predictions(h: &PredictorHandle, d: &Dataset) -> Result<Vec<f64>> {
    h.check_dataset(d)?;
    d.rows()
        .par_iter()
        .map(|r| h.predict_scalar_row(r).map_err(DescriptorError::from))
        .collect()
}

/// Conditional group means aligned with `grid.points`; `None` where the
/// group was dropped. The cheap inner loop of resampling procedures.
pub fn cpdp_curve(h: &PredictorHandle, d_eval: &Dataset, grid: &Grid, band: f64) -> Result<Vec<Option<f64>>> {
    let preds = predictions(h, d_eval)?;
    let grouping = conditional_groups(d_eval, grid, band)?;
    let mut out = vec![None; grid.points.len()];
    let mut g = grouping.groups.iter().peekable();
    for (slot, &point) in out.iter_mut().zip(&grid.points) {
        if let Some(group) = g.next_if(|group| group.grid_point == point) {
            *slot = Some(mean(&group.member_row_indices.iter().map(|&i| preds[i]).collect::<Vec<_>>()));
        }
    }
    Ok(out)
}

/// Conditional partial dependence: at each grid value `i`, the mean of `h`
/// over evaluation rows with `x_p` within the default band of `i`.
pub fn cpdp(h: &PredictorHandle, d_eval: &Dataset, feature: usize, grid: &Grid) -> Result<DescriptorResult> {
    cpdp_with_band(h, d_eval, feature, grid, default_band(d_eval, grid))
}

pub fn cpdp_with_band(
    h: &PredictorHandle,
    d_eval: &Dataset,
    feature: usize,
    grid: &Grid,
    band: f64,
) -> Result<DescriptorResult> {
    check_grid(d_eval, feature, grid)?;
    let preds = predictions(h, d_eval)?;
    let grouping = conditional_groups(d_eval, grid, band)?;
    if grouping.groups.is_empty() {
        return Err(DescriptorError::AllGroupsEmpty);
    }
    let points = grouping
        .groups
        .iter()
        .map(|g| {
            let values: Vec<f64> = g.member_row_indices.iter().map(|&i| preds[i]).collect();
            CurvePoint {
                grid_value: g.grid_point,
                estimate: mean(&values),
                group_size: values.len(),
                std_error: Some(std_error(&values)),
            }
        })
        .collect();
    let mut spec = DescriptorSpec::new(Question::Cpdp);
    spec.features = vec![feature];
    Ok(DescriptorResult {
        spec,
        payload: Payload::Curve { points },
        diagnostics: Diagnostics {
            sparse_region: Some(grouping.sparse),
            sampler: "grouping".into(),
            evaluation_size: d_eval.len(),
            ..Default::default()
        },
    })
}

/// Individual conditional expectation curve `v -> h(v, x_-p)`, kept only at
/// grid values where the spliced point is supported by `d_eval`.
pub fn ice(
    h: &PredictorHandle,
    instance: &[f64],
    feature: usize,
    grid: &Grid,
    d_eval: &Dataset,
) -> Result<DescriptorResult> {
    ice_with_band(h, instance, feature, grid, d_eval, DEFAULT_SUPPORT_BAND)
}

pub fn ice_with_band(
    h: &PredictorHandle,
    instance: &[f64],
    feature: usize,
    grid: &Grid,
    d_eval: &Dataset,
    quantile_band: f64,
) -> Result<DescriptorResult> {
    check_grid(d_eval, feature, grid)?;
    if instance.len() != d_eval.n_features() {
        return Err(DescriptorError::InvalidSpec("instance length does not match the data".into()));
    }
    let support = SupportIndex::new(d_eval, quantile_band);
    if !support.contains(instance) {
        return Err(DescriptorError::OffSupportInstance);
    }
    let spliced: Vec<(f64, Vec<f64>)> = grid
        .points
        .iter()
        .map(|&v| {
            let mut x = instance.to_vec();
            x[feature] = v;
            (v, x)
        })
        .collect();
    let kept: Vec<bool> = spliced.par_iter().map(|(_, x)| support.contains(x)).collect();
    let mut points = Vec::new();
    let mut off_support = Vec::new();
    for ((v, x), keep) in spliced.iter().zip(kept) {
        if keep {
            points.push(CurvePoint { grid_value: *v, estimate: h.predict_scalar_row(x)?, group_size: 1, std_error: None });
        } else {
            off_support.push(*v);
        }
    }
    let mut spec = DescriptorSpec::new(Question::Ice);
    spec.features = vec![feature];
    spec.instance = Some(instance.to_vec());
    Ok(DescriptorResult {
        spec,
        payload: Payload::Curve { points },
        diagnostics: Diagnostics {
            sampler: "support_check".into(),
            evaluation_size: d_eval.len(),
            off_support,
            ..Default::default()
        },
    })
}
