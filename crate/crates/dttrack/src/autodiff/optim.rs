//! Moment-based optimizer step with decoupled weight decay.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::params::ParamSet;
use super::tape::GradMap;
use super::tensor::quantize_slice;

/// Optimizer hyperparameters. The decay is applied to parameters directly,
/// not through the gradients.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptimHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for OptimHyper {
    fn default() -> Self {
        OptimHyper {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

/// Per-parameter first and second moments plus the step count.
#[derive(Clone, Debug)]
pub struct OptimState {
    first: BTreeMap<String, Vec<f64>>,
    second: BTreeMap<String, Vec<f64>>,
    step_count: u64,
    pub hyper: OptimHyper,
}

impl OptimState {
    /// Zero-initialized moments matching the parameter set.
    pub fn new(params: &ParamSet, hyper: OptimHyper) -> Self {
        let zeros = |_: &str, n: usize| vec![0.0; n];
        OptimState {
            first: params
                .iter()
                .map(|(k, p)| (k.to_string(), zeros(k, p.numel())))
                .collect(),
            second: params
                .iter()
                .map(|(k, p)| (k.to_string(), zeros(k, p.numel())))
                .collect(),
            step_count: 0,
            hyper,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One update:
    ///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
    ///   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * decay * p
    ///
    /// Gradients must cover exactly the parameter names and lr must be
    /// positive; anything else is a contract violation.
    pub fn step(&mut self, params: &mut ParamSet, grads: &GradMap, lr: f64) -> Result<()> {
        if !(lr > 0.0) {
            return Err(Error::Contract(format!("optimizer step: lr must be > 0, got {lr}")));
        }
        for name in params.names() {
            if grads.get(name).is_none() {
                return Err(Error::MissingGradient(name.to_string()));
            }
        }
        let param_count = params.len();
        if grads.len() != param_count {
            let extra: Vec<&str> = grads
                .names()
                .filter(|n| params.get(n).is_none())
                .collect();
            return Err(Error::Contract(format!(
                "optimizer step: gradients for unknown parameters {extra:?}"
            )));
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let OptimHyper {
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.hyper;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);

        for (name, param) in params.iter_mut() {
            let g = grads.get(name).expect("cover checked above");
            let m = self.first.get_mut(name).expect("state matches params");
            let v = self.second.get_mut(name).expect("state matches params");
            for i in 0..param.data.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param.data[i] -=
                    lr * m_hat / (v_hat.sqrt() + eps) + lr * weight_decay * param.data[i];
            }
            quantize_slice(m);
            quantize_slice(v);
            quantize_slice(&mut param.data);
        }
        Ok(())
    }
}
