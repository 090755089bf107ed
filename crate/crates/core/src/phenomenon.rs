//! Analytic ground-truth distributions over `(X, Y)`.
//!
//! Three families are supported, all with closed-form conditionals:
//!
//! - `linear_gaussian`: `X ~ N(mu, Sigma)`, `Y = b0 + b.X + noise`;
//!   conditioning uses the Schur complement of `Sigma`.
//! - `nonlinear_independent`: independent marginals and a response built
//!   from univariate monomials of degree ≤ 3 and pairwise products, so every
//!   conditional expectation reduces to products of raw moments.
//! - `discrete_classification`: an explicit joint table `P(x, y)` over a
//!   finite support.
//!
//! For each family and loss the optimal predictor `m_S` of any feature
//! subset `S` and its expected prediction error are available exactly; they
//! are the oracles against which the estimators are tested.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, FeatureSpec, Provenance};
use crate::models::{Encoder, LossFunction, Metadata, Model, OutputKind, PolyTerm, PredictorHandle};
use crate::rng::rng;

#[derive(Debug, Error)]
pub enum PhenomenonError {
    #[error("invalid phenomenon: {0}")]
    Invalid(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
}

impl PhenomenonError {
    pub fn code(&self) -> &'static str {
        match self {
            PhenomenonError::Invalid(_) => "InvalidPhenomenon",
            PhenomenonError::UnsupportedCombination(_) => "UnsupportedCombination",
        }
    }
}

type Result<T> = std::result::Result<T, PhenomenonError>;

fn unsupported(msg: impl Into<String>) -> PhenomenonError {
    PhenomenonError::UnsupportedCombination(msg.into())
}

/// Marginal law of one feature of a `nonlinear_independent` phenomenon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

impl Marginal {
    /// Raw moment `E[X^d]`.
    pub fn moment(&self, d: u32) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                // sum over even k of C(d,k) mean^(d-k) sd^k (k-1)!!
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut double_fact = 1.0;
                for k in 0..=d {
                    if k > 0 {
                        binom *= (d - k + 1) as f64 / k as f64;
                    }
                    if k % 2 == 0 {
                        if k >= 2 {
                            double_fact *= (k - 1) as f64;
                        }
                        total += binom * mean.powi((d - k) as i32) * sd.powi(k as i32) * double_fact;
                    }
                }
                total
            }
            Marginal::Uniform { low, high } => {
                if high == low {
                    return low.powi(d as i32);
                }
                let e = d as i32 + 1;
                (high.powi(e) - low.powi(e)) / ((d + 1) as f64 * (high - low))
            }
        }
    }

    fn sample(&self, r: &mut crate::rng::Rng) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(r);
                mean + sd * z
            }
            Marginal::Uniform { low, high } => low + (high - low) * r.random::<f64>(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Normal { mean, sd } if mean.is_finite() && sd.is_finite() && sd >= 0.0 => Ok(()),
            Marginal::Uniform { low, high } if low.is_finite() && high.is_finite() && low <= high => Ok(()),
            _ => Err(PhenomenonError::Invalid(format!("bad marginal {self:?}"))),
        }
    }
}

/// One additive term of a symbolic response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResponseTerm {
    /// `coefficient * x[feature]^degree`, degree 1 to 3.
    Monomial { feature: usize, degree: u32, coefficient: f64 },
    /// `coefficient * x[a] * x[b]`, `a != b`.
    Product { a: usize, b: usize, coefficient: f64 },
}

impl ResponseTerm {
    fn coefficient(&self) -> f64 {
        match *self {
            ResponseTerm::Monomial { coefficient, .. } | ResponseTerm::Product { coefficient, .. } => coefficient,
        }
    }

    /// Dense power vector over `n` features.
    fn powers(&self, n: usize) -> Vec<u32> {
        let mut p = vec![0; n];
        match *self {
            ResponseTerm::Monomial { feature, degree, .. } => p[feature] += degree,
            ResponseTerm::Product { a, b, .. } => {
                p[a] += 1;
                p[b] += 1;
            }
        }
        p
    }

    fn check(&self, n: usize) -> Result<()> {
        match *self {
            ResponseTerm::Monomial { feature, degree, .. } if feature < n && (1..=3).contains(&degree) => Ok(()),
            ResponseTerm::Product { a, b, .. } if a < n && b < n && a != b => Ok(()),
            _ => Err(unsupported(format!("response term {self:?} is outside the supported forms"))),
        }
    }
}

/// A joint distribution over `(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phenomenon {
    LinearGaussian {
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        intercept: f64,
        noise_sd: f64,
    },
    NonlinearIndependent {
        marginals: Vec<Marginal>,
        terms: Vec<ResponseTerm>,
        intercept: f64,
        noise_sd: f64,
    },
    DiscreteClassification {
        /// Feature configurations `x`.
        support: Vec<Vec<f64>>,
        labels: Vec<String>,
        /// `table[i][j] = P(X = support[i], Y = labels[j])`.
        table: Vec<Vec<f64>>,
    },
}

/// A phenomenon paired with the loss whose optimal predictor is wanted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPredictorSpec {
    pub phenomenon: Phenomenon,
    pub loss: LossFunction,
}

struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    beta: DVector<f64>,
}

impl Gaussian {
    fn sub(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.cov[(rows[i], cols[j])])
    }

    /// Coefficients of the population regression of `b.X` on `X_S`.
    fn projection(&self, subset: &[usize]) -> DVector<f64> {
        if subset.is_empty() {
            return DVector::zeros(0);
        }
        let all: Vec<usize> = (0..self.mean.len()).collect();
        let sss = self.sub(subset, subset);
        let ssa = self.sub(subset, &all);
        let rhs = ssa * &self.beta;
        sss.cholesky().expect("covariance is positive definite").solve(&rhs)
    }

    fn signal_variance(&self) -> f64 {
        (self.beta.transpose() * &self.cov * &self.beta)[(0, 0)]
    }

    /// `Var(b.X | X_S)`.
    fn residual_variance(&self, subset: &[usize]) -> f64 {
        let coef = self.projection(subset);
        let all: Vec<usize> = (0..self.mean.len()).collect();
        let explained = if subset.is_empty() {
            0.0
        } else {
            let ssa = self.sub(subset, &all);
            (coef.transpose() * ssa * &self.beta)[(0, 0)]
        };
        (self.signal_variance() - explained).max(0.0)
    }
}

impl Phenomenon {
    pub fn n_features(&self) -> usize {
        match self {
            Phenomenon::LinearGaussian { mean, .. } => mean.len(),
            Phenomenon::NonlinearIndependent { marginals, .. } => marginals.len(),
            Phenomenon::DiscreteClassification { support, .. } => support.first().map_or(0, Vec::len),
        }
    }

    pub fn is_regression(&self) -> bool {
        !matches!(self, Phenomenon::DiscreteClassification { .. })
    }

    pub fn feature_specs(&self) -> Vec<FeatureSpec> {
        (1..=self.n_features()).map(|i| FeatureSpec::numeric(format!("X{i}"))).collect()
    }

    pub fn target_spec(&self) -> FeatureSpec {
        match self {
            Phenomenon::DiscreteClassification { labels, .. } => FeatureSpec::categorical("Y", labels.clone()),
            _ => FeatureSpec::numeric("Y"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(PhenomenonError::Invalid(m));
        match self {
            Phenomenon::LinearGaussian { mean, covariance, coefficients, intercept, noise_sd } => {
                let n = mean.len();
                if n == 0 || coefficients.len() != n || covariance.len() != n || covariance.iter().any(|r| r.len() != n) {
                    return invalid(format!("dimension mismatch for n = {n}"));
                }
                if !(noise_sd.is_finite() && *noise_sd >= 0.0 && intercept.is_finite()) {
                    return invalid("noise_sd must be finite and non-negative".into());
                }
                for i in 0..n {
                    for j in 0..n {
                        if (covariance[i][j] - covariance[j][i]).abs() > 1e-12 {
                            return invalid("covariance is not symmetric".into());
                        }
                    }
                }
                let sym = self.gaussian().cov.symmetric_eigenvalues();
                if sym.iter().any(|&e| !(e > 0.0)) {
                    return invalid("covariance is not positive definite".into());
                }
            }
            Phenomenon::NonlinearIndependent { marginals, terms, noise_sd, .. } => {
                if marginals.is_empty() {
                    return invalid("no features".into());
                }
                if !(noise_sd.is_finite() && *noise_sd >= 0.0) {
                    return invalid("noise_sd must be finite and non-negative".into());
                }
                for m in marginals {
                    m.validate()?;
                }
                for t in terms {
                    t.check(marginals.len())?;
                }
            }
            Phenomenon::DiscreteClassification { support, labels, table } => {
                let n = self.n_features();
                if support.is_empty() || labels.is_empty() || support.iter().any(|s| s.len() != n) {
                    return invalid("empty or ragged support".into());
                }
                if table.len() != support.len() || table.iter().any(|r| r.len() != labels.len()) {
                    return invalid("table shape does not match support x labels".into());
                }
                if table.iter().flatten().any(|&p| !(p >= 0.0)) {
                    return invalid("negative probability".into());
                }
                let total: f64 = table.iter().flatten().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return invalid(format!("table sums to {total}, not 1"));
                }
            }
        }
        Ok(())
    }

    fn gaussian(&self) -> Gaussian {
        match self {
            Phenomenon::LinearGaussian { mean, covariance, coefficients, .. } => {
                let n = mean.len();
                Gaussian {
                    mean: DVector::from_column_slice(mean),
                    cov: DMatrix::from_fn(n, n, |i, j| covariance[i][j]),
                    beta: DVector::from_column_slice(coefficients),
                }
            }
            _ => unreachable!("gaussian() on a non-Gaussian phenomenon"),
        }
    }

    fn check_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let n = self.n_features();
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if let Some(&bad) = s.iter().find(|&&j| j >= n) {
            return Err(PhenomenonError::Invalid(format!("feature index {bad} out of range (n = {n})")));
        }
        Ok(s)
    }

    /// Draws `k` i.i.d. rows.
    pub fn sample(&self, k: usize, seed: u64) -> Result<Dataset> {
        self.validate()?;
        if k == 0 {
            return Err(PhenomenonError::Invalid("sample size must be at least 1".into()));
        }
        let mut r = rng(seed);
        let mut rows = Vec::with_capacity(k);
        let mut targets = Vec::with_capacity(k);
        match self {
            Phenomenon::LinearGaussian { intercept, noise_sd, .. } => {
                let g = self.gaussian();
                let chol = g.cov.clone().cholesky().expect("validated").l();
                let n = g.mean.len();
                for _ in 0..k {
                    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut r));
                    let x = &g.mean + &chol * z;
                    let eps: f64 = StandardNormal.sample(&mut r);
                    let signal = intercept + g.beta.dot(&x);
                    targets.push(if *noise_sd == 0.0 { signal } else { signal + noise_sd * eps });
                    rows.push(x.iter().copied().collect());
                }
            }
            Phenomenon::NonlinearIndependent { marginals, noise_sd, .. } => {
                for _ in 0..k {
                    let x: Vec<f64> = marginals.iter().map(|m| m.sample(&mut r)).collect();
                    let eps: f64 = StandardNormal.sample(&mut r);
                    let signal = self.response(&x);
                    targets.push(if *noise_sd == 0.0 { signal } else { signal + noise_sd * eps });
                    rows.push(x);
                }
            }
            Phenomenon::DiscreteClassification { support, labels, table } => {
                let cells: Vec<(usize, usize, f64)> = table
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &p)| (i, j, p)))
                    .collect();
                for _ in 0..k {
                    let u: f64 = r.random();
                    let mut acc = 0.0;
                    let mut pick = cells.iter().rev().find(|c| c.2 > 0.0).copied().expect("non-zero cell");
                    for &c in &cells {
                        acc += c.2;
                        if u < acc && c.2 > 0.0 {
                            pick = c;
                            break;
                        }
                    }
                    rows.push(support[pick.0].clone());
                    targets.push(pick.1 as f64);
                }
                debug_assert!(labels.len() > 0);
            }
        }
        Dataset::new(self.feature_specs(), self.target_spec(), rows, targets, Provenance::Synthetic, Some(seed))
            .map_err(|e| PhenomenonError::Invalid(e.to_string()))
    }

    /// Noise-free response `f(x)` of a regression phenomenon.
    pub fn response(&self, x: &[f64]) -> f64 {
        match self {
            Phenomenon::LinearGaussian { coefficients, intercept, .. } => {
                intercept + coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
            }
            Phenomenon::NonlinearIndependent { terms, intercept, .. } => {
                intercept
                    + terms
                        .iter()
                        .map(|t| match *t {
                            ResponseTerm::Monomial { feature, degree, coefficient } => {
                                coefficient * x[feature].powi(degree as i32)
                            }
                            ResponseTerm::Product { a, b, coefficient } => coefficient * x[a] * x[b],
                        })
                        .sum::<f64>()
            }
            Phenomenon::DiscreteClassification { .. } => f64::NAN,
        }
    }

    /// Draws `count` full feature vectors from `P(X_{-p} | X_p = v)`, with
    /// `v` in coordinate `feature`.
    pub fn sample_conditional(&self, feature: usize, v: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        self.check_subset(&[feature])?;
        let mut r = rng(seed);
        match self {
            Phenomenon::LinearGaussian { .. } => {
                let g = self.gaussian();
                let n = g.mean.len();
                let rest: Vec<usize> = (0..n).filter(|&i| i != feature).collect();
                let spp = g.cov[(feature, feature)];
                let cross = g.sub(&rest, &[feature]);
                let cond_mean = DVector::from_fn(rest.len(), |i, _| {
                    g.mean[rest[i]] + cross[(i, 0)] / spp * (v - g.mean[feature])
                });
                let cond_cov = g.sub(&rest, &rest) - &cross * cross.transpose() / spp;
                let chol = if rest.is_empty() {
                    DMatrix::zeros(0, 0)
                } else {
                    cond_cov.cholesky().expect("Schur complement is positive definite").l()
                };
                Ok((0..count)
                    .map(|_| {
                        let z = DVector::from_fn(rest.len(), |_, _| StandardNormal.sample(&mut r));
                        let xr = &cond_mean + &chol * z;
                        let mut x = vec![0.0; n];
                        x[feature] = v;
                        for (i, &j) in rest.iter().enumerate() {
                            x[j] = xr[i];
                        }
                        x
                    })
                    .collect())
            }
            Phenomenon::NonlinearIndependent { marginals, .. } => Ok((0..count)
                .map(|_| {
                    marginals
                        .iter()
                        .enumerate()
                        .map(|(j, m)| if j == feature { v } else { m.sample(&mut r) })
                        .collect()
                })
                .collect()),
            Phenomenon::DiscreteClassification { .. } => {
                Err(unsupported("conditional sampling is implemented for regression phenomena"))
            }
        }
    }

    /// Exact `E[Y | X_feature = v]`.
    pub fn true_conditional_expectation(&self, feature: usize, v: f64) -> Result<f64> {
        self.validate()?;
        self.check_subset(&[feature])?;
        match self {
            Phenomenon::LinearGaussian { mean, covariance, coefficients, intercept, .. } => {
                // E[X_i | X_p = v] = mu_i + S_ip / S_pp (v - mu_p)
                let spp = covariance[feature][feature];
                Ok(intercept
                    + coefficients
                        .iter()
                        .enumerate()
                        .map(|(i, b)| b * (mean[i] + covariance[i][feature] / spp * (v - mean[feature])))
                        .sum::<f64>())
            }
            Phenomenon::NonlinearIndependent { marginals, terms, intercept, .. } => Ok(intercept
                + terms
                    .iter()
                    .map(|t| {
                        t.coefficient()
                            * t.powers(marginals.len())
                                .iter()
                                .enumerate()
                                .map(|(i, &p)| if i == feature { v.powi(p as i32) } else { marginals[i].moment(p) })
                                .product::<f64>()
                    })
                    .sum::<f64>()),
            Phenomenon::DiscreteClassification { .. } => {
                Err(unsupported("conditional expectation needs a regression phenomenon"))
            }
        }
    }

    fn check_loss(&self, loss: LossFunction) -> Result<()> {
        if self.is_regression() != loss.is_regression() {
            return Err(unsupported(format!(
                "loss {loss:?} with a {} phenomenon",
                if self.is_regression() { "regression" } else { "classification" }
            )));
        }
        Ok(())
    }

    /// Optimal predictor `m_S` using only the features in `subset`.
    ///
    /// The handle's columns are the subset's positions, so it evaluates on
    /// full rows sampled from this phenomenon.
    pub fn optimal_subset_predictor(&self, loss: LossFunction, subset: &[usize]) -> Result<PredictorHandle> {
        self.validate()?;
        self.check_loss(loss)?;
        let s = self.check_subset(subset)?;
        let specs = self.feature_specs();
        let model = match self {
            Phenomenon::LinearGaussian { intercept, .. } => {
                // symmetric noise: conditional median equals conditional mean
                let g = self.gaussian();
                let coef = self.gaussian().projection(&s);
                let centre = s.iter().zip(coef.iter()).map(|(&j, c)| c * g.mean[j]).sum::<f64>();
                Model::Linear {
                    encoder: Encoder::identity(s.len()),
                    intercept: intercept + g.beta.dot(&g.mean) - centre,
                    coefficients: coef.iter().copied().collect(),
                }
            }
            Phenomenon::NonlinearIndependent { marginals, terms, intercept, .. } => {
                let n = marginals.len();
                let mut constant = *intercept;
                let mut poly = Vec::new();
                for t in terms {
                    let mut c = t.coefficient();
                    let mut powers = Vec::new();
                    for (i, &p) in t.powers(n).iter().enumerate() {
                        if p == 0 {
                            continue;
                        }
                        match s.iter().position(|&j| j == i) {
                            Some(local) => powers.push((local, p)),
                            None => c *= marginals[i].moment(p),
                        }
                    }
                    if powers.is_empty() {
                        constant += c;
                    } else {
                        poly.push(PolyTerm { coefficient: c, powers });
                    }
                }
                Model::Polynomial { intercept: constant, terms: poly }
            }
            Phenomenon::DiscreteClassification { .. } => {
                let (support, joint) = self.marginal_table(&s);
                let conditionals = joint
                    .iter()
                    .map(|row| {
                        let total: f64 = row.iter().sum();
                        row.iter().map(|p| p / total).collect()
                    })
                    .collect();
                let output = if loss == LossFunction::Kl { OutputKind::Distribution } else { OutputKind::Scalar };
                Model::Table { support, conditionals, output }
            }
        };
        let metadata = Metadata {
            learner: "optimal".into(),
            hyperparameters: serde_json::json!({ "loss": loss, "subset": s }),
            seed: None,
            training_loss: Vec::new(),
        };
        Ok(PredictorHandle::new(s.iter().map(|&j| specs[j].clone()).collect(), s, model, metadata))
    }

    /// Joint table of `(x_S, y)` with zero-mass support points removed,
    /// support points in order of first appearance.
    fn marginal_table(&self, subset: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let Phenomenon::DiscreteClassification { support, labels, table } = self else {
            unreachable!("marginal_table on a regression phenomenon")
        };
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut keys = Vec::new();
        let mut joint: Vec<Vec<f64>> = Vec::new();
        for (x, row) in support.iter().zip(table) {
            let proj: Vec<f64> = subset.iter().map(|&j| x[j]).collect();
            let key: Vec<u64> = proj.iter().map(|v| v.to_bits()).collect();
            let i = *index.entry(key).or_insert_with(|| {
                keys.push(proj);
                joint.push(vec![0.0; labels.len()]);
                joint.len() - 1
            });
            for (acc, p) in joint[i].iter_mut().zip(row) {
                *acc += p;
            }
        }
        keys.into_iter().zip(joint).filter(|(_, row)| row.iter().sum::<f64>() > 0.0).unzip()
    }

    /// Expected prediction error of the optimal subset predictor `m_S`.
    pub fn true_epe(&self, loss: LossFunction, subset: &[usize]) -> Result<f64> {
        self.validate()?;
        self.check_loss(loss)?;
        let s = self.check_subset(subset)?;
        let full = s.len() == self.n_features();
        let gaussian_mae = |var: f64| var.sqrt() * (2.0 / PI).sqrt();
        match (self, loss) {
            (Phenomenon::LinearGaussian { noise_sd, .. }, _) => {
                let var = noise_sd * noise_sd + self.gaussian().residual_variance(&s);
                Ok(if loss == LossFunction::Mse { var } else { gaussian_mae(var) })
            }
            (Phenomenon::NonlinearIndependent { noise_sd, .. }, LossFunction::Mse) => {
                Ok(noise_sd * noise_sd + self.nonlinear_residual_variance(&s))
            }
            (Phenomenon::NonlinearIndependent { noise_sd, .. }, LossFunction::Mae) if full => {
                Ok(gaussian_mae(noise_sd * noise_sd))
            }
            (Phenomenon::NonlinearIndependent { .. }, _) => {
                Err(unsupported("MAE risk of a nonlinear response on a feature subset has no closed form"))
            }
            (Phenomenon::DiscreteClassification { .. }, LossFunction::ZeroOne) => {
                let (_, joint) = self.marginal_table(&s);
                Ok(1.0 - joint.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).sum::<f64>())
            }
            (Phenomenon::DiscreteClassification { .. }, _) => {
                // log loss of P(Y | x_S): conditional entropy H(Y | X_S)
                let (_, joint) = self.marginal_table(&s);
                Ok(joint
                    .iter()
                    .map(|row| {
                        let total: f64 = row.iter().sum();
                        row.iter().filter(|&&p| p > 0.0).map(|&p| -p * (p / total).ln()).sum::<f64>()
                    })
                    .sum())
            }
        }
    }

    /// `E[(f(X) - E[f(X) | X_S])^2]` from raw moments.
    fn nonlinear_residual_variance(&self, subset: &[usize]) -> f64 {
        let Phenomenon::NonlinearIndependent { marginals, terms, .. } = self else {
            unreachable!()
        };
        let n = marginals.len();
        let in_s: Vec<bool> = (0..n).map(|i| subset.contains(&i)).collect();
        let powered: Vec<(f64, Vec<u32>)> = terms.iter().map(|t| (t.coefficient(), t.powers(n))).collect();
        let mut second = 0.0;
        let mut projected = 0.0;
        for (ct, pt) in &powered {
            for (cu, pu) in &powered {
                let mut full = 1.0;
                let mut cond = 1.0;
                for i in 0..n {
                    let m = &marginals[i];
                    full *= m.moment(pt[i] + pu[i]);
                    cond *= if in_s[i] { m.moment(pt[i] + pu[i]) } else { m.moment(pt[i]) * m.moment(pu[i]) };
                }
                second += ct * cu * full;
                projected += ct * cu * cond;
            }
        }
        (second - projected).max(0.0)
    }

    /// Variance of `Y`.
    pub fn target_variance(&self) -> Result<f64> {
        self.true_epe(LossFunction::Mse, &[])
    }
}

/// Optimal predictor for the loss over all features.
pub fn optimal_predictor(spec: &OptimalPredictorSpec) -> Result<PredictorHandle> {
    let all: Vec<usize> = (0..spec.phenomenon.n_features()).collect();
    spec.phenomenon.optimal_subset_predictor(spec.loss, &all)
}
