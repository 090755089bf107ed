//! Operational stand-ins for the conditional distribution `P(X_-p | X_p)`.
//!
//! Grids pick the evaluation points of a conditional curve, groups collect
//! the evaluation rows that share a grid value, samplers draw realistic
//! `X_-p` for a fixed `X_p`, and [`SupportIndex`] decides whether a point is
//! plausible enough to query a model at.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset, FeatureKind};
use crate::rng::{rng, stream_seed};
use crate::stats::{median, quantile_sorted, sorted};

/// Groups with fewer members are dropped and reported as sparse.
pub const MIN_GROUP_SIZE: usize = 5;

/// Grid size used when a caller does not pick one.
pub const DEFAULT_GRID_POINTS: usize = 20;

/// Default `q` of the per-feature `[q, 1 - q]` support band.
pub const DEFAULT_SUPPORT_BAND: f64 = 0.005;

/// Percentile of nearest-neighbour self-distances used as the support radius.
pub const SUPPORT_DISTANCE_PERCENTILE: f64 = 0.99;

const SUPPORT_REFERENCE_ROWS: usize = 2000;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid sampler argument: {0}")]
    InvalidArgument(String),
    #[error("no source rows near {feature} = {value}; the query is off-distribution")]
    EmptyNeighborhood { feature: String, value: f64 },
}

impl SamplerError {
    pub fn code(&self) -> &'static str {
        match self {
            SamplerError::Data(e) => e.code(),
            SamplerError::InvalidArgument(_) => "InvalidArgument",
            SamplerError::EmptyNeighborhood { .. } => "EmptyNeighborhood",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStrategy {
    UniqueValues,
    Quantile,
}

/// Evaluation points for one feature; categorical points are category indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub feature_index: usize,
    pub feature: String,
    pub points: Vec<f64>,
    pub strategy: GridStrategy,
}

impl Grid {
    /// A grid over explicit points, sorted and deduplicated.
    pub fn from_points(d: &Dataset, feature: &str, points: &[f64]) -> Result<Grid, SamplerError> {
        let feature_index = d.feature_index(feature)?;
        let mut points = sorted(points);
        points.dedup();
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(SamplerError::InvalidArgument("grid points must be finite and non-empty".into()));
        }
        Ok(Grid { feature_index, feature: feature.to_string(), points, strategy: GridStrategy::UniqueValues })
    }
}

/// Unique values when there are at most `max_points` of them, otherwise
/// quantiles at equispaced probability levels.
pub fn build_grid(d: &Dataset, feature: &str, max_points: usize) -> Result<Grid, SamplerError> {
    let j = d.feature_index(feature)?;
    if max_points < 2 {
        return Err(SamplerError::InvalidArgument(format!("max_points must be at least 2, got {max_points}")));
    }
    if d.is_empty() {
        return Err(SamplerError::InvalidArgument("cannot build a grid on an empty dataset".into()));
    }
    let values = sorted(&d.column(j));
    let mut unique = values.clone();
    unique.dedup();
    let (points, strategy) = if unique.len() <= max_points || d.features()[j].kind == FeatureKind::Categorical {
        (unique, GridStrategy::UniqueValues)
    } else {
        let mut q: Vec<f64> = (0..max_points)
            .map(|i| quantile_sorted(&values, i as f64 / (max_points - 1) as f64))
            .collect();
        q.dedup();
        (q, GridStrategy::Quantile)
    };
    Ok(Grid { feature_index: j, feature: feature.to_string(), points, strategy })
}

/// 0 for integer and categorical features, half the median gap between
/// adjacent grid points for continuous ones.
pub fn default_band(d: &Dataset, grid: &Grid) -> f64 {
    if d.features()[grid.feature_index].kind != FeatureKind::Numeric || grid.points.len() < 2 {
        return 0.0;
    }
    let gaps: Vec<f64> = grid.points.windows(2).map(|w| w[1] - w[0]).collect();
    median(&gaps) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalGroup {
    pub grid_point: f64,
    pub member_row_indices: Vec<usize>,
    /// Member count over evaluation size.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPoint {
    pub grid_point: f64,
    pub members: usize,
}

/// Grid points left out of a conditional curve for lack of data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRegionReport {
    pub feature: String,
    pub band: f64,
    pub min_group_size: usize,
    pub evaluation_size: usize,
    pub dropped: Vec<DroppedPoint>,
}

impl SparseRegionReport {
    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub groups: Vec<ConditionalGroup>,
    pub sparse: SparseRegionReport,
}

/// Rows whose feature lies within `band` of each grid point.
///
/// Categorical features always match exactly. Groups smaller than
/// [`MIN_GROUP_SIZE`] are dropped into the sparse-region report.
pub fn conditional_groups(d: &Dataset, grid: &Grid, band: f64) -> Result<Grouping, SamplerError> {
    if !(band >= 0.0) || !band.is_finite() {
        return Err(SamplerError::InvalidArgument(format!("band must be finite and non-negative, got {band}")));
    }
    let j = grid.feature_index;
    if j >= d.n_features() {
        return Err(DataError::UnknownFeature(grid.feature.clone()).into());
    }
    let band = if d.features()[j].kind == FeatureKind::Categorical { 0.0 } else { band };
    let k = d.len();
    let mut groups = Vec::new();
    let mut dropped = Vec::new();
    for &point in &grid.points {
        let members: Vec<usize> = (0..k).filter(|&i| (d.row(i)[j] - point).abs() <= band).collect();
        if members.len() < MIN_GROUP_SIZE {
            dropped.push(DroppedPoint { grid_point: point, members: members.len() });
        } else {
            groups.push(ConditionalGroup { grid_point: point, weight: members.len() as f64 / k as f64, member_row_indices: members });
        }
    }
    Ok(Grouping {
        groups,
        sparse: SparseRegionReport {
            feature: grid.feature.clone(),
            band,
            min_group_size: MIN_GROUP_SIZE,
            evaluation_size: k,
            dropped,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    /// Resample rows whose conditioned feature matches the fixed value.
    Grouping,
    /// Resample among the `knn_k` rows nearest in the conditioned feature.
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerDistance {
    EuclideanStandardized,
    Gower,
}

/// Range-normalised absolute difference for numeric cells, 0/1 mismatch for
/// categorical cells, averaged over features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gower {
    pub ranges: Vec<f64>,
    pub categorical: Vec<bool>,
}

impl Gower {
    pub fn fit(d: &Dataset) -> Self {
        let ranges = (0..d.n_features())
            .map(|j| {
                let col = d.column(j);
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            })
            .collect();
        let categorical = d.features().iter().map(|f| f.kind == FeatureKind::Categorical).collect();
        Self { ranges, categorical }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        if a.is_empty() {
            return 0.0;
        }
        let total: f64 = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(j, (x, y))| {
                if self.categorical[j] {
                    f64::from(u8::from(x != y))
                } else {
                    ((x - y) / self.ranges[j]).abs()
                }
            })
            .sum();
        total / a.len() as f64
    }
}

/// Draws realistic companions `X_-p` for a fixed `X_p` from a source dataset.
#[derive(Debug, Clone)]
pub struct ConditionalSampler {
    pub method: SamplerMethod,
    pub knn_k: usize,
    pub distance: SamplerDistance,
    /// Matching tolerance of the grouping method; `None` uses [`default_band`].
    pub band: Option<f64>,
    pub source: Dataset,
}

impl ConditionalSampler {
    pub fn grouping(source: Dataset) -> Self {
        Self { method: SamplerMethod::Grouping, knn_k: MIN_GROUP_SIZE, distance: SamplerDistance::Gower, band: None, source }
    }

    pub fn knn(source: Dataset, knn_k: usize, distance: SamplerDistance) -> Self {
        Self { method: SamplerMethod::Knn, knn_k, distance, band: None, source }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.source.is_empty() {
            return Err(SamplerError::InvalidArgument("sampler source is empty".into()));
        }
        if self.knn_k == 0 || self.knn_k > self.source.len() {
            return Err(SamplerError::InvalidArgument(format!(
                "knn_k = {} must lie in 1..={}",
                self.knn_k,
                self.source.len()
            )));
        }
        Ok(())
    }

    /// Label recorded in descriptor diagnostics.
    pub fn label(&self) -> String {
        match self.method {
            SamplerMethod::Grouping => "grouping".into(),
            SamplerMethod::Knn => format!("knn(k={}, {:?})", self.knn_k, self.distance).to_lowercase(),
        }
    }

    /// Band used by the grouping method for `feature`.
    pub fn band_for(&self, feature: usize) -> Result<f64, SamplerError> {
        if let Some(b) = self.band {
            return Ok(b);
        }
        let name = self.source.features()[feature].name.clone();
        let grid = build_grid(&self.source, &name, DEFAULT_GRID_POINTS)?;
        Ok(default_band(&self.source, &grid))
    }

    /// Source rows eligible as companions of `X_feature = value`.
    pub fn neighbourhood(&self, feature: usize, value: f64) -> Result<Vec<usize>, SamplerError> {
        self.validate()?;
        let d = &self.source;
        if feature >= d.n_features() {
            return Err(SamplerError::InvalidArgument(format!("feature index {feature} out of range")));
        }
        let spec = &d.features()[feature];
        let empty = || SamplerError::EmptyNeighborhood { feature: spec.name.clone(), value };
        let col = d.column(feature);
        match self.method {
            SamplerMethod::Grouping => {
                let band = if spec.kind == FeatureKind::Categorical { 0.0 } else { self.band_for(feature)? };
                let rows: Vec<usize> = (0..d.len()).filter(|&i| (col[i] - value).abs() <= band).collect();
                if rows.is_empty() {
                    return Err(empty());
                }
                Ok(rows)
            }
            SamplerMethod::Knn => {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let inside = if spec.kind == FeatureKind::Categorical {
                    col.contains(&value)
                } else {
                    let slack = 0.05 * (hi - lo);
                    value >= lo - slack && value <= hi + slack
                };
                if !inside {
                    return Err(empty());
                }
                let scale = match self.distance {
                    SamplerDistance::Gower => if hi > lo { hi - lo } else { 1.0 },
                    SamplerDistance::EuclideanStandardized => {
                        let sd = crate::stats::sample_variance(&col).sqrt();
                        if sd > 0.0 { sd } else { 1.0 }
                    }
                };
                let gap = |x: f64| {
                    if spec.kind == FeatureKind::Categorical {
                        f64::from(u8::from(x != value))
                    } else {
                        (x - value).abs() / scale
                    }
                };
                let mut order: Vec<usize> = (0..d.len()).collect();
                order.sort_by(|&a, &b| gap(col[a]).total_cmp(&gap(col[b])).then(a.cmp(&b)));
                order.truncate(self.knn_k);
                Ok(order)
            }
        }
    }
}

/// `count` feature vectors drawn from the sampler's stand-in for
/// `P(X_-p | X_p = value)`; the fixed coordinate always equals `value`.
pub fn conditional_sample(
    s: &ConditionalSampler,
    fixed: (usize, f64),
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SamplerError> {
    let (feature, value) = fixed;
    if count == 0 {
        return Err(SamplerError::InvalidArgument("count must be at least 1".into()));
    }
    let pool = s.neighbourhood(feature, value)?;
    let mut r = rng(stream_seed(seed, "conditional_sample", feature as u64));
    Ok((0..count)
        .map(|_| {
            let mut x = s.source.row(pool[r.random_range(0..pool.len())]).to_vec();
            x[feature] = value;
            x
        })
        .collect())
}

/// Precomputed positive-density proxy over a dataset.
///
/// A point is supported when it is an observed row, or when every feature
/// lies inside its empirical `[q, 1 - q]` quantile band and its Gower
/// distance to the nearest row does not exceed the 99th percentile of the
/// rows' own nearest-neighbour distances.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    rows: Vec<Vec<f64>>,
    observed: HashSet<Vec<u64>>,
    bands: Vec<(f64, f64)>,
    categories: Vec<Option<HashSet<u64>>>,
    pub metric: Gower,
    pub radius: f64,
}

fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl SupportIndex {
    pub fn new(d: &Dataset, quantile_band: f64) -> Self {
        let q = quantile_band.clamp(0.0, 0.5);
        let metric = Gower::fit(d);
        let n = d.n_features();
        let mut bands = Vec::with_capacity(n);
        let mut categories = Vec::with_capacity(n);
        for j in 0..n {
            let col = sorted(&d.column(j));
            if metric.categorical[j] {
                categories.push(Some(col.iter().map(|v| v.to_bits()).collect()));
                bands.push((f64::NEG_INFINITY, f64::INFINITY));
            } else {
                categories.push(None);
                bands.push((quantile_sorted(&col, q), quantile_sorted(&col, 1.0 - q)));
            }
        }
        let rows = d.rows().to_vec();
        let reference: Vec<usize> = if rows.len() > SUPPORT_REFERENCE_ROWS {
            let mut r = rng(stream_seed(rows.len() as u64, "support_reference", 0));
            let mut idx = index::sample(&mut r, rows.len(), SUPPORT_REFERENCE_ROWS).into_vec();
            idx.sort_unstable();
            idx
        } else {
            (0..rows.len()).collect()
        };
        let self_distances: Vec<f64> = reference
            .par_iter()
            .map(|&i| {
                rows.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, r)| metric.distance(&rows[i], r))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let finite: Vec<f64> = self_distances.into_iter().filter(|v| v.is_finite()).collect();
        let radius = if finite.is_empty() { 0.0 } else { quantile_sorted(&sorted(&finite), SUPPORT_DISTANCE_PERCENTILE) };
        Self { observed: rows.iter().map(|r| bits(r)).collect(), rows, bands, categories, metric, radius }
    }

    pub fn in_bands(&self, x: &[f64]) -> bool {
        x.len() == self.bands.len()
            && x.iter().enumerate().all(|(j, v)| match &self.categories[j] {
                Some(cats) => cats.contains(&v.to_bits()),
                None => *v >= self.bands[j].0 && *v <= self.bands[j].1,
            })
    }

    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| self.metric.distance(x, r)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.bands.len() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        self.observed.contains(&bits(x)) || (self.in_bands(x) && self.nearest_distance(x) <= self.radius)
    }
}

/// One-shot form of [`SupportIndex::contains`].
pub fn support_check(d: &Dataset, x: &[f64], quantile_band: f64) -> bool {
    SupportIndex::new(d, quantile_band).contains(x)
}
