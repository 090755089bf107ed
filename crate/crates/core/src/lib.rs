//! Property descriptors for tabular prediction models.
//!
//! `descry` answers questions about the data-generating process through a
//! trained model: how the expected target moves with one feature (conditional
//! partial dependence), how much predictive value a feature carries (refit
//! conditional importance, SAGE), how a single prediction splits across
//! features (conditional Shapley values), and which realistic inputs lead to a
//! target value of interest. Every descriptor can be paired with confidence
//! intervals that separate the error from finite evaluation data from the
//! error of the model itself.
//!
//! The [`phenomenon`] module provides analytic joint distributions with
//! closed-form conditionals. They act as ground truth: the optimal predictor
//! of a phenomenon fed through a descriptor must reproduce the exact
//! conditional quantity, which is how every estimator in this crate is tested.
//!
//! Module map:
//!
//! - [`data`]: datasets, CSV ingestion, centering, jitter augmentation, splits
//!   and resampling.
//! - [`phenomenon`]: ground-truth distributions and their optimal predictors.
//! - [`models`]: the predictor interface, OLS / kNN / MLP learners, losses,
//!   empirical risk and subset refits.
//! - [`samplers`]: grids, conditional groups, conditional sampling and the
//!   support check.
//! - [`descriptors`]: cPDP, ICE, cPFI, SAGE, conditional Shapley values,
//!   local conditional contribution, relevant values and counterfactuals.
//! - [`uncertainty`]: model error, estimation error, their bias-variance
//!   decompositions and pointwise confidence intervals.

pub mod data;
pub mod descriptors;
mod error;
pub mod models;
pub mod phenomenon;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod uncertainty;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
