//! Model error, estimation error and their confidence intervals.
//!
//! For a curve descriptor `g` (the conditional PDP of one feature):
//!
//! - model error `ME = d_Q(g_K(m), g_K(m̂))` compares the trained model with
//!   the optimal one under full knowledge `K`;
//! - estimation error `EE = d_Q(g_K(m̂), ĝ_{D*}(m̂))` compares the finite
//!   evaluation-data estimate with its full-knowledge value.
//!
//! `d_Q` is the squared difference averaged over retained grid points. Full
//! knowledge is stood in for by a very large synthetic reference sample.
//!
//! [`ci_estimation`] resamples the evaluation data only and gives
//! `ĝ ± t·sqrt(V_{D*})`. [`ci_combined`] also refits the model on resampled
//! training data and gives `ĝ ± t·sqrt(V_{D,D*})`; it is valid only if the
//! learner is unbiased, and overlapping resamples can make it too narrow.
//! Both caveats are carried as flags on the report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{resample, DataError, Dataset, Provenance, ResampleMethod, ResamplePlan};
use crate::descriptors::{cpdp_curve, DescriptorError};
use crate::models::{train, LearnerConfig, LossFunction, ModelError, PredictorHandle};
use crate::phenomenon::{Phenomenon, PhenomenonError};
use crate::rng::stream_seed;
use crate::samplers::{build_grid, default_band, Grid, SamplerError};
use crate::stats::{critical_value, mean, population_variance, sample_variance};

/// Smallest replicate count accepted for interval output.
pub const MIN_REPLICATES: usize = 20;

#[derive(Debug, Error)]
pub enum UncertaintyError {
    #[error("{what} = {got} replicates; at least {min} are required", min = MIN_REPLICATES)]
    InsufficientReplicates { what: &'static str, got: usize },
    #[error("every grid point was dropped for lack of data")]
    AllGroupsEmpty,
    #[error("estimation error needs a synthetic full-knowledge reference sample")]
    NoReferenceAvailable,
    #[error("model error needs the optimal predictor of a known phenomenon")]
    NoOracleAvailable,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Phenomenon(#[from] PhenomenonError),
}

impl UncertaintyError {
    pub fn code(&self) -> &'static str {
        match self {
            UncertaintyError::InsufficientReplicates { .. } => "InsufficientReplicates",
            UncertaintyError::AllGroupsEmpty => "AllGroupsEmpty",
            UncertaintyError::NoReferenceAvailable => "NoReferenceAvailable",
            UncertaintyError::NoOracleAvailable => "NoOracleAvailable",
            UncertaintyError::InvalidConfig(_) => "InvalidConfig",
            UncertaintyError::Descriptor(e) => e.code(),
            UncertaintyError::Model(e) => e.code(),
            UncertaintyError::Data(e) => e.code(),
            UncertaintyError::Sampler(e) => e.code(),
            UncertaintyError::Phenomenon(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, UncertaintyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileFamily {
    StudentT,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CIConfig {
    pub alpha: f64,
    /// Evaluation-data resamples.
    pub ee_replicates: usize,
    /// Model refits (combined intervals only).
    pub me_replicates: usize,
    /// Resampling of the evaluation data in [`ci_estimation`], of the
    /// training data in [`ci_combined`]. Its seed seeds everything.
    pub resample_plan: ResamplePlan,
    pub quantile_family: QuantileFamily,
}

impl CIConfig {
    /// Student-t intervals, bootstrap evaluation resamples.
    pub fn new(alpha: f64, replicates: usize, seed: u64) -> Self {
        Self {
            alpha,
            ee_replicates: replicates,
            me_replicates: replicates,
            resample_plan: ResamplePlan::bootstrap(replicates, seed),
            quantile_family: QuantileFamily::StudentT,
        }
    }

    /// Half-sample training refits, suited to [`ci_combined`].
    pub fn combined(alpha: f64, me_replicates: usize, ee_replicates: usize, seed: u64) -> Self {
        Self {
            alpha,
            ee_replicates,
            me_replicates,
            resample_plan: ResamplePlan::subsample(0.5, me_replicates, seed),
            quantile_family: QuantileFamily::StudentT,
        }
    }

    pub fn seed(&self) -> u64 {
        self.resample_plan.seed
    }

    fn validate(&self, combined: bool) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(UncertaintyError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.ee_replicates < MIN_REPLICATES {
            return Err(UncertaintyError::InsufficientReplicates { what: "ee_replicates", got: self.ee_replicates });
        }
        if combined && self.me_replicates < MIN_REPLICATES {
            return Err(UncertaintyError::InsufficientReplicates { what: "me_replicates", got: self.me_replicates });
        }
        self.resample_plan.validate()?;
        Ok(())
    }

    fn critical(&self, df: usize) -> f64 {
        match self.quantile_family {
            QuantileFamily::StudentT => critical_value(self.alpha, Some(df as f64)),
            QuantileFamily::Normal => critical_value(self.alpha, None),
        }
    }
}

/// A conditional PDP as a resampling target: feature, grid and band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTarget {
    pub feature: usize,
    pub grid: Grid,
    pub band: f64,
}

impl CurveTarget {
    /// Grid of at most `max_points` points over `d`, default band.
    pub fn new(d: &Dataset, feature: &str, max_points: usize) -> Result<Self> {
        let grid = build_grid(d, feature, max_points)?;
        Ok(Self { feature: grid.feature_index, band: default_band(d, &grid), grid })
    }

    pub fn with_grid(d: &Dataset, grid: Grid) -> Self {
        Self { feature: grid.feature_index, band: default_band(d, &grid), grid }
    }

    pub fn evaluate(&self, h: &PredictorHandle, d: &Dataset) -> Result<Vec<Option<f64>>> {
        Ok(cpdp_curve(h, d, &self.grid, self.band)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn around(centre: f64, half_width: f64) -> Self {
        Self { lo: centre - half_width, hi: centre + half_width }
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// `self ⊇ other` up to `tol`.
    pub fn covers(&self, other: &Interval, tol: f64) -> bool {
        self.lo <= other.lo + tol && self.hi >= other.hi - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    pub unbiased_learner_assumed: bool,
    pub resampling_overlap_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Estimation,
    Combined,
}

/// Pointwise variances and intervals over the retained grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub kind: ReportKind,
    pub assumptions: Assumptions,
    /// Retained grid points only.
    pub grid: Grid,
    /// Grid points without an estimate or without enough replicate values.
    pub dropped_points: Vec<f64>,
    pub alpha: f64,
    pub quantile_family: QuantileFamily,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
    pub ee_replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub me_replicates: Option<usize>,
    pub point_estimates: Vec<f64>,
    pub var_ee: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_me_ee: Option<Vec<f64>>,
    pub ci_ee: Vec<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_me_ee: Option<Vec<Interval>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicate_curves: Option<Vec<Vec<Option<f64>>>>,
}

impl UncertaintyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Header block with the assumption flags, then
    /// `grid,estimate,ci_ee_lo,ci_ee_hi,ci_me_ee_lo,ci_me_ee_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# kind={}\n# unbiased_learner_assumed={}\n# resampling_overlap_warning={}\n# alpha={}\n",
            match self.kind {
                ReportKind::Estimation => "estimation",
                ReportKind::Combined => "combined",
            },
            self.assumptions.unbiased_learner_assumed,
            self.assumptions.resampling_overlap_warning,
            self.alpha
        );
        out.push_str("grid,estimate,ci_ee_lo,ci_ee_hi,ci_me_ee_lo,ci_me_ee_hi\n");
        for (i, g) in self.grid.points.iter().enumerate() {
            let (lo, hi) = match &self.ci_me_ee {
                Some(c) => (c[i].lo.to_string(), c[i].hi.to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                g, self.point_estimates[i], self.ci_ee[i].lo, self.ci_ee[i].hi, lo, hi
            ));
        }
        out
    }
}

fn is_reference(d: &Dataset) -> bool {
    d.provenance() == Provenance::Synthetic
}

/// Squared difference averaged over points present in both curves.
pub fn curve_distance(a: &[Option<f64>], b: &[Option<f64>]) -> Result<f64> {
    let sq: Vec<f64> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).powi(2)))
        .collect();
    if sq.is_empty() {
        return Err(UncertaintyError::AllGroupsEmpty);
    }
    Ok(mean(&sq))
}

/// `EE = d_Q(g_K(h), ĝ_{d_eval}(h))`, with `reference` a large synthetic
/// sample standing in for full knowledge.
pub fn estimation_error(h: &PredictorHandle, reference: &Dataset, d_eval: &Dataset, target: &CurveTarget) -> Result<f64> {
    if !is_reference(reference) {
        return Err(UncertaintyError::NoReferenceAvailable);
    }
    curve_distance(&target.evaluate(h, reference)?, &target.evaluate(h, d_eval)?)
}

/// `ME = d_Q(g_K(oracle), g_K(h))`, both on the reference sample.
pub fn model_error(
    h: &PredictorHandle,
    oracle: Option<&PredictorHandle>,
    reference: &Dataset,
    target: &CurveTarget,
) -> Result<f64> {
    let oracle = oracle.ok_or(UncertaintyError::NoOracleAvailable)?;
    if !is_reference(reference) {
        return Err(UncertaintyError::NoReferenceAvailable);
    }
    curve_distance(&target.evaluate(oracle, reference)?, &target.evaluate(h, reference)?)
}

/// Bias-variance split of the model error over training sets of size `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasVariance {
    pub grid_points: Vec<f64>,
    pub oracle: Vec<f64>,
    pub mean_curve: Vec<f64>,
    pub bias_sq: Vec<f64>,
    /// Population variance over replicates, so `bias_sq + variance` equals
    /// the mean squared error exactly.
    pub variance: Vec<f64>,
    pub mean_squared_error: Vec<f64>,
    /// Per-replicate model error.
    pub model_errors: Vec<f64>,
}

/// Refits `config` on `replicates` fresh samples of size `k` from `p` and
/// decomposes the model error of the curve at each grid point.
#[allow(clippy::too_many_arguments)]
pub fn bias_variance_me(
    config: &LearnerConfig,
    p: &Phenomenon,
    k: usize,
    replicates: usize,
    target: &CurveTarget,
    reference: &Dataset,
    loss: LossFunction,
    seed: u64,
) -> Result<BiasVariance> {
    if replicates < 2 {
        return Err(UncertaintyError::InsufficientReplicates { what: "replicates", got: replicates });
    }
    let all: Vec<usize> = (0..p.n_features()).collect();
    let oracle = p.optimal_subset_predictor(loss, &all)?;
    let g_star = target.evaluate(&oracle, reference)?;
    let curves: Vec<Vec<Option<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let d = p.sample(k, stream_seed(seed, "bias_variance_data", r as u64))?;
            let cfg = config.with_seed(stream_seed(seed, "bias_variance_fit", r as u64));
            let h = train(&cfg, &d, loss)?;
            target.evaluate(&h, reference)
        })
        .collect::<Result<_>>()?;
    let keep: Vec<usize> = (0..g_star.len())
        .filter(|&i| g_star[i].is_some() && curves.iter().all(|c| c[i].is_some()))
        .collect();
    if keep.is_empty() {
        return Err(UncertaintyError::AllGroupsEmpty);
    }
    let mut out = BiasVariance {
        grid_points: keep.iter().map(|&i| target.grid.points[i]).collect(),
        oracle: Vec::new(),
        mean_curve: Vec::new(),
        bias_sq: Vec::new(),
        variance: Vec::new(),
        mean_squared_error: Vec::new(),
        model_errors: Vec::new(),
    };
    for &i in &keep {
        let truth = g_star[i].expect("kept");
        let values: Vec<f64> = curves.iter().map(|c| c[i].expect("kept")).collect();
        let m = mean(&values);
        out.oracle.push(truth);
        out.mean_curve.push(m);
        out.bias_sq.push((m - truth).powi(2));
        out.variance.push(population_variance(&values));
        out.mean_squared_error.push(mean(&values.iter().map(|v| (v - truth).powi(2)).collect::<Vec<_>>()));
    }
    out.model_errors = curves
        .iter()
        .map(|c| mean(&keep.iter().map(|&i| (c[i].expect("kept") - g_star[i].expect("kept")).powi(2)).collect::<Vec<_>>()))
        .collect();
    Ok(out)
}

/// Pointwise `CI_EE = ĝ ± t·sqrt(V̂_{D*})`, with `V̂_{D*}` the sample
/// variance of the descriptor over resampled evaluation sets.
pub fn ci_estimation(h: &PredictorHandle, d_eval: &Dataset, target: &CurveTarget, cfg: &CIConfig) -> Result<UncertaintyReport> {
    ci_estimation_with(d_eval, &target.grid, cfg, |d| target.evaluate(h, d))
}

/// [`ci_estimation`] for any curve- or scalar-valued estimator aligned with
/// `grid` (a scalar uses a one-point grid).
pub fn ci_estimation_with<F>(d_eval: &Dataset, grid: &Grid, cfg: &CIConfig, estimator: F) -> Result<UncertaintyReport>
where
    F: Fn(&Dataset) -> Result<Vec<Option<f64>>> + Sync,
{
    cfg.validate(false)?;
    let plan = ResamplePlan { replicates: cfg.ee_replicates, ..cfg.resample_plan.clone() };
    let full = estimator(d_eval)?;
    let curves: Vec<Vec<Option<f64>>> = (0..cfg.ee_replicates)
        .into_par_iter()
        .map(|r| estimator(&resample(d_eval, &plan, r)?))
        .collect::<Result<_>>()?;
    let df = cfg.ee_replicates - 1;
    let t = cfg.critical(df);
    let mut report = empty_report(ReportKind::Estimation, grid, cfg, df, t);
    for (i, &point) in grid.points.iter().enumerate() {
        let values: Vec<f64> = curves.iter().filter_map(|c| c[i]).collect();
        match full[i] {
            Some(est) if values.len() >= 2 => {
                let var = sample_variance(&values);
                report.grid.points.push(point);
                report.point_estimates.push(est);
                report.var_ee.push(var);
                report.ci_ee.push(Interval::around(est, t * var.sqrt()));
            }
            _ => report.dropped_points.push(point),
        }
    }
    if report.point_estimates.is_empty() {
        return Err(UncertaintyError::AllGroupsEmpty);
    }
    report.replicate_curves = Some(curves);
    Ok(report)
}

fn empty_report(kind: ReportKind, grid: &Grid, cfg: &CIConfig, df: usize, t: f64) -> UncertaintyReport {
    UncertaintyReport {
        kind,
        assumptions: Assumptions {
            unbiased_learner_assumed: kind == ReportKind::Combined,
            resampling_overlap_warning: kind == ReportKind::Combined,
        },
        grid: Grid { points: Vec::new(), ..grid.clone() },
        dropped_points: Vec::new(),
        alpha: cfg.alpha,
        quantile_family: cfg.quantile_family,
        degrees_of_freedom: df,
        critical_value: t,
        ee_replicates: cfg.ee_replicates,
        me_replicates: None,
        point_estimates: Vec::new(),
        var_ee: Vec::new(),
        var_me_ee: None,
        ci_ee: Vec::new(),
        ci_me_ee: None,
        replicate_curves: None,
    }
}

/// Pointwise `CI_{ME∧EE} = ĝ ± t·sqrt(V̂_{D,D*})`.
///
/// For each of `me_replicates` training resamples (per `cfg.resample_plan`;
/// half-samples recommended) the learner is refit, and for each of
/// `ee_replicates` bootstrap resamples of `d_eval` the curve is recomputed
/// (pass the same dataset twice when training and evaluation data agree).
/// `V̂_{D,D*}` is the variance pooled over all pairs; `V̂_{D*}` is the mean
/// within-refit variance, so the combined interval always contains the
/// estimation interval. Both use `min(me, ee) - 1` degrees of freedom.
pub fn ci_combined(
    config: &LearnerConfig,
    d_train: &Dataset,
    d_eval: &Dataset,
    target: &CurveTarget,
    loss: LossFunction,
    cfg: &CIConfig,
) -> Result<UncertaintyReport> {
    cfg.validate(true)?;
    let seed = cfg.seed();
    let fit_plan = ResamplePlan { replicates: cfg.me_replicates, ..cfg.resample_plan.clone() };
    let point = target.evaluate(&train(config, d_train, loss)?, d_eval)?;
    let blocks: Vec<Vec<Vec<Option<f64>>>> = (0..cfg.me_replicates)
        .into_par_iter()
        .map(|m| {
            let fit_data = resample(d_train, &fit_plan, m)?;
            let h = train(&config.with_seed(stream_seed(seed, "refit", m as u64)), &fit_data, loss)?;
            let eval_plan = ResamplePlan {
                method: ResampleMethod::Bootstrap,
                fraction: 1.0,
                replicates: cfg.ee_replicates,
                seed: stream_seed(seed, "evaluation", m as u64),
            };
            (0..cfg.ee_replicates)
                .into_par_iter()
                .map(|e| target.evaluate(&h, &resample(d_eval, &eval_plan, e)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let df = cfg.me_replicates.min(cfg.ee_replicates) - 1;
    let t = cfg.critical(df);
    let mut report = empty_report(ReportKind::Combined, &target.grid, cfg, df, t);
    report.me_replicates = Some(cfg.me_replicates);
    let mut var_me_ee = Vec::new();
    let mut ci_me_ee = Vec::new();
    for (i, &g) in target.grid.points.iter().enumerate() {
        let groups: Vec<Vec<f64>> = blocks
            .iter()
            .map(|b| b.iter().filter_map(|c| c[i]).collect::<Vec<f64>>())
            .filter(|v| v.len() >= 2)
            .collect();
        let total: usize = groups.iter().map(Vec::len).sum();
        let est = match point[i] {
            Some(est) if groups.len() >= 2 => est,
            _ => {
                report.dropped_points.push(g);
                continue;
            }
        };
        // pooled = weighted within + between, population denominators
        let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
        let within = groups.iter().map(|v| v.len() as f64 * population_variance(v)).sum::<f64>() / total as f64;
        let combined = population_variance(&pooled).max(within);
        report.grid.points.push(g);
        report.point_estimates.push(est);
        report.var_ee.push(within);
        report.ci_ee.push(Interval::around(est, t * within.sqrt()));
        var_me_ee.push(combined);
        ci_me_ee.push(Interval::around(est, t * combined.sqrt()));
    }
    if report.point_estimates.is_empty() {
        return Err(UncertaintyError::AllGroupsEmpty);
    }
    report.var_me_ee = Some(var_me_ee);
    report.ci_me_ee = Some(ci_me_ee);
    report.replicate_curves = Some(blocks.into_iter().flatten().collect());
    Ok(report)
}
