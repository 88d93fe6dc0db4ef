use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::GcnParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment accumulators mirroring the weight shapes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState {
    pub m: Vec<Array2<f64>>,
    pub v: Vec<Array2<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn for_weights(weights: &[Array2<f64>]) -> Self {
        AdamState {
            m: weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v: weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of every weight matrix.
pub fn adam_step(params: &mut GcnParams, grads: &[Array2<f64>], cfg: &AdamConfig) {
    assert_eq!(grads.len(), params.weights.len(), "one gradient per weight matrix");
    let state = &mut params.adam;
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (l, g) in grads.iter().enumerate() {
        Zip::from(&mut params.weights[l])
            .and(&mut state.m[l])
            .and(&mut state.v[l])
            .and(g)
            .for_each(|w, m, v, &g| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            });
    }
}
