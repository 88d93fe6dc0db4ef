//! Two-layer GCN and MLP in double precision with hand-written reverse-mode
//! gradients.
//!
//! Layer `l` computes `h⁽ˡ⁺¹⁾ = σ(ĥ⁽ˡ⁾ W⁽ˡ⁾)` where `ĥ⁽ˡ⁾` is the
//! aggregation of `h⁽ˡ⁾` over the epoch graph (or `h⁽ˡ⁾` itself for an
//! MLP). The last layer emits raw logits.

mod adam;
mod checkpoint;
mod train;

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::sampling::EpochGraph;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use train::{evaluation_graph, train, EpochRecord, TrainConfig, TrainOutcome, EVAL_EPOCH};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Linear,
}

impl Activation {
    fn apply(self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => z.mapv(|v| v.max(0.0)),
            Activation::Linear => z.clone(),
        }
    }

    fn backprop(self, grad: &mut Array2<f64>, pre: &Array2<f64>) {
        if self == Activation::Relu {
            Zip::from(grad).and(pre).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0;
                }
            });
        }
    }
}

/// Layer weights plus optimizer state.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    pub weights: Vec<Array2<f64>>,
    pub activation: Activation,
    /// `false` turns the model into an MLP with identical layer shapes.
    pub message_passing: bool,
    pub adam: AdamState,
}

impl GcnParams {
    /// Zero-initialised parameters for layer widths `dims[0] → … → dims[L]`.
    pub fn zeros(dims: &[usize], activation: Activation, message_passing: bool) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::validation(format!("invalid layer widths {dims:?}")));
        }
        let weights: Vec<Array2<f64>> = dims.windows(2).map(|w| Array2::zeros((w[0], w[1]))).collect();
        let adam = AdamState::for_weights(&weights);
        Ok(GcnParams {
            weights,
            activation,
            message_passing,
            adam,
        })
    }

    /// Glorot-uniform initialisation, `U(±√(6/(fan_in+fan_out)))`.
    pub fn glorot(dims: &[usize], activation: Activation, message_passing: bool, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(dims, activation, message_passing)?;
        let mut r = rng::stream(seed, &[tag::INIT]);
        for w in &mut p.weights {
            let bound = (6.0 / (w.nrows() + w.ncols()) as f64).sqrt();
            w.mapv_inplace(|_| r.random_range(-bound..bound));
        }
        Ok(p)
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].ncols()
    }
}

/// Every intermediate of a forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    /// `ĥ⁽ˡ⁾`, the (aggregated) input of layer `l`.
    pub aggregated: Vec<Array2<f64>>,
    /// `ĥ⁽ˡ⁾ W⁽ˡ⁾` before the activation.
    pub pre_activation: Vec<Array2<f64>>,
    /// `h⁽⁰⁾ = X`, …, `h⁽ᴸ⁾` = logits.
    pub hidden: Vec<Array2<f64>>,
}

impl ForwardPass {
    pub fn logits(&self) -> &Array2<f64> {
        self.hidden.last().expect("at least one layer")
    }
}

pub fn forward(params: &GcnParams, eg: &EpochGraph, features: ArrayView2<'_, f64>) -> Result<ForwardPass> {
    if features.ncols() != params.input_dim() {
        return Err(Error::validation(format!(
            "feature width {} does not match first layer input {}",
            features.ncols(),
            params.input_dim()
        )));
    }
    if params.message_passing && eg.num_nodes() != features.nrows() {
        return Err(Error::validation(format!(
            "epoch graph has {} nodes but features have {} rows",
            eg.num_nodes(),
            features.nrows()
        )));
    }
    let layers = params.num_layers();
    let mut pass = ForwardPass {
        aggregated: Vec::with_capacity(layers),
        pre_activation: Vec::with_capacity(layers),
        hidden: vec![features.to_owned()],
    };
    for (l, w) in params.weights.iter().enumerate() {
        let h = &pass.hidden[l];
        let agg = if params.message_passing { eg.aggregate(h.view()) } else { h.clone() };
        let z = agg.dot(w);
        let out = if l + 1 == layers { z.clone() } else { params.activation.apply(&z) };
        pass.aggregated.push(agg);
        pass.pre_activation.push(z);
        pass.hidden.push(out);
    }
    Ok(pass)
}

/// Row-wise softmax.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}

/// Mean softmax cross-entropy of `logits` over the nodes in `mask`.
pub fn cross_entropy(logits: &Array2<f64>, labels: &[u8], mask: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in mask {
        let row = logits.row(i);
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[labels[i] as usize];
    }
    total / mask.len() as f64
}

/// Loss `mean CE over train_mask + (λ/2)·Σ‖W‖²_F` and its exact gradient
/// with respect to every weight matrix, holding the epoch graph fixed.
pub fn loss_and_grads(
    params: &GcnParams,
    eg: &EpochGraph,
    features: ArrayView2<'_, f64>,
    labels: &[u8],
    train_mask: &[usize],
    weight_decay: f64,
) -> Result<(f64, Vec<Array2<f64>>)> {
    if train_mask.is_empty() {
        return Err(Error::validation("training mask is empty"));
    }
    let classes = params.output_dim();
    if let Some(&i) = train_mask.iter().find(|&&i| labels[i] as usize >= classes) {
        return Err(Error::validation(format!("node {i}: label {} exceeds output width {classes}", labels[i])));
    }
    let pass = forward(params, eg, features)?;
    let logits = pass.logits();
    let m = train_mask.len() as f64;
    let decay: f64 = params.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum();
    let loss = cross_entropy(logits, labels, train_mask) + 0.5 * weight_decay * decay;

    let probs = softmax(logits);
    let mut dz = Array2::<f64>::zeros(logits.raw_dim());
    for &i in train_mask {
        let mut row = dz.row_mut(i);
        row.scaled_add(1.0 / m, &probs.row(i));
        row[labels[i] as usize] -= 1.0 / m;
    }

    let layers = params.num_layers();
    let mut grads = vec![Array2::zeros((0, 0)); layers];
    for l in (0..layers).rev() {
        let w = &params.weights[l];
        let mut gw = pass.aggregated[l].t().dot(&dz);
        gw.scaled_add(weight_decay, w);
        grads[l] = gw;
        if l == 0 {
            break;
        }
        let d_agg = dz.dot(&w.t());
        let mut dh = if params.message_passing {
            eg.aggregate_transpose(d_agg.view())
        } else {
            d_agg
        };
        params.activation.backprop(&mut dh, &pass.pre_activation[l - 1]);
        dz = dh;
    }
    Ok((loss, grads))
}

/// Post-activation representation after layer `layer` (1-based, `1..=L`;
/// layer `L` is the logits).
pub fn extract_embeddings(
    params: &GcnParams,
    eg: &EpochGraph,
    features: ArrayView2<'_, f64>,
    layer: usize,
) -> Result<Array2<f64>> {
    if layer == 0 || layer > params.num_layers() {
        return Err(Error::validation(format!(
            "embedding layer {layer} outside 1..={}",
            params.num_layers()
        )));
    }
    let mut pass = forward(params, eg, features)?;
    Ok(pass.hidden.swap_remove(layer))
}

/// Argmax class per row.
pub fn predict(logits: &Array2<f64>) -> Vec<u8> {
    logits
        .axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best as u8
        })
        .collect()
}

/// Softmax probability of class 1 per row.
pub fn positive_scores(logits: &Array2<f64>) -> Vec<f64> {
    softmax(logits).column(1).to_vec()
}
