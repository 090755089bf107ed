//! Ordinary least squares via the normal equations.

use nalgebra::{DMatrix, DVector};

use super::{Encoder, Model, ModelError};
use crate::data::Dataset;

const RIDGE: f64 = 1e-8;

pub(crate) fn fit_ols(d: &Dataset) -> Result<Model, ModelError> {
    let encoder = Encoder::for_linear(d);
    let p = encoder.width() + 1;
    let k = d.len();
    let mut x = DMatrix::<f64>::zeros(k, p);
    for (i, row) in d.rows().iter().enumerate() {
        x[(i, 0)] = 1.0;
        for (j, v) in encoder.encode(row).into_iter().enumerate() {
            x[(i, j + 1)] = v;
        }
    }
    let y = DVector::from_column_slice(d.targets());
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let beta = match xtx.clone().cholesky() {
        Some(c) => c.solve(&xty),
        None => {
            let ridged = xtx + DMatrix::<f64>::identity(p, p) * RIDGE;
            ridged.cholesky().ok_or(ModelError::SingularDesign)?.solve(&xty)
        }
    };
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(ModelError::SingularDesign);
    }
    Ok(Model::Linear { encoder, intercept: beta[0], coefficients: beta.iter().skip(1).copied().collect() })
}
