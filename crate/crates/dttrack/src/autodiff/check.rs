//! Finite-difference gradient checking at 64-bit precision.

use crate::error::{Error, Result};

use super::params::ParamSet;
use super::tape::{backward, Tape};
use super::tensor::{with_precision, DiffTensor, Precision};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Compares reverse-mode gradients of a scalar function against central
/// differences at the given point, at 64-bit precision regardless of the
/// surrounding mode.
///
/// Returns the maximum over coordinates of
/// `|analytic - numeric| / max(1e-12, |analytic| + |numeric|)`.
pub fn grad_check<F>(f: F, point: &DiffTensor, step: f64) -> Result<f64>
where
    F: Fn(&DiffTensor) -> Result<DiffTensor>,
{
    with_precision(Precision::F64, || {
        let tape = Tape::new();
        let x = tape.leaf("x", point.data().to_vec(), point.shape())?;
        let y = f(&x)?;
        if y.numel() != 1 {
            return Err(Error::Contract(format!(
                "grad_check: function output must be scalar, got shape {:?}",
                y.shape()
            )));
        }
        // A function that never touches the point has an exactly-zero gradient.
        let grads = if y.node_id().is_some() {
            backward(&y)?
        } else {
            Default::default()
        };
        let zeros = vec![0.0; point.numel()];
        let analytic = grads.get("x").unwrap_or(&zeros);

        let mut max_err = 0.0f64;
        for i in 0..point.numel() {
            let mut plus = point.data().to_vec();
            let mut minus = plus.clone();
            plus[i] += step;
            minus[i] -= step;
            let fp = f(&DiffTensor::constant(plus, point.shape())?)?.item();
            let fm = f(&DiffTensor::constant(minus, point.shape())?)?.item();
            let numeric = (fp - fm) / (2.0 * step);
            max_err = max_err.max(relative_error(analytic[i], numeric));
        }
        Ok(max_err)
    })
}

/// [`grad_check`] over a whole named parameter set: the function sees mounted
/// leaves, and every coordinate of every parameter is perturbed in turn.
pub fn grad_check_params<F>(f: F, params: &ParamSet, step: f64) -> Result<f64>
where
    F: Fn(&std::collections::BTreeMap<String, DiffTensor>) -> Result<DiffTensor>,
{
    with_precision(Precision::F64, || {
        let tape = Tape::new();
        let mounted = params.mount(&tape)?;
        let y = f(&mounted)?;
        if y.numel() != 1 {
            return Err(Error::Contract(format!(
                "grad_check_params: function output must be scalar, got shape {:?}",
                y.shape()
            )));
        }
        let grads = if y.node_id().is_some() {
            backward(&y)?
        } else {
            Default::default()
        };

        let mut max_err = 0.0f64;
        for (name, param) in params.iter() {
            let zeros = vec![0.0; param.data.len()];
            let analytic = grads.get(name).unwrap_or(&zeros);
            for i in 0..param.data.len() {
                let eval = |delta: f64| -> Result<f64> {
                    let mut perturbed = params.clone();
                    perturbed.get_mut(name).unwrap().data[i] += delta;
                    Ok(f(&perturbed.as_constants())?.item())
                };
                let numeric = (eval(step)? - eval(-step)?) / (2.0 * step);
                max_err = max_err.max(relative_error(analytic[i], numeric));
            }
        }
        Ok(max_err)
    })
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (1e-12f64).max(analytic.abs() + numeric.abs())
}
