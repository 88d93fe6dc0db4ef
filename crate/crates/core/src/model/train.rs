use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{adam_step, cross_entropy, forward, loss_and_grads, Activation, AdamConfig, GcnParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{Graph, SplitMasks};
use crate::metrics::evaluate;
use crate::sampling::{compute_balance_table, EpochGraph, NormMode, Sampler, SamplerMode};

/// Epoch index of the RNG stream used for the evaluation neighborhood.
pub const EVAL_EPOCH: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub layers: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub norm: NormMode,
    pub mlp: bool,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub sampler: SamplerMode,
    pub beta: f64,
    pub delta: f64,
    pub hops: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            layers: 2,
            hidden: 128,
            activation: Activation::Relu,
            norm: NormMode::Row,
            mlp: false,
            lr: 1e-3,
            weight_decay: 1e-5,
            epochs: 1000,
            sampler: SamplerMode::Bemap,
            beta: 0.25,
            delta: 1.0,
            hops: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 || self.epochs == 0 {
            return Err(Error::validation("layers, hidden and epochs must all be positive"));
        }
        if !(self.lr > 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::validation("lr must be positive and weight_decay non-negative"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::validation(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.delta > 0.0) || self.hops == 0 {
            return Err(Error::validation("delta must be positive and hops at least 1"));
        }
        Ok(())
    }

    pub fn layer_dims(&self, input: usize) -> Vec<usize> {
        let mut dims = vec![input];
        dims.extend(std::iter::repeat_n(self.hidden, self.layers - 1));
        dims.push(2);
        dims
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub val_auc: Option<f64>,
    pub val_delta_sp: Option<f64>,
    pub val_delta_eo: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters at the epoch with the best validation accuracy.
    pub params: GcnParams,
    pub best_epoch: usize,
    pub log: Vec<EpochRecord>,
    /// Neighborhood structure used for validation and test predictions.
    pub eval_graph: EpochGraph,
}

/// The neighborhood used at inference: full for vanilla message passing,
/// otherwise one fair neighborhood drawn from a dedicated stream.
pub fn evaluation_graph(sampler: &Sampler<'_>, seed: u64, exec: Exec) -> EpochGraph {
    sampler.sample_epoch(seed, EVAL_EPOCH, exec)
}

/// Trains with a fresh epoch graph per epoch: sample, forward, exact
/// gradient, Adam. Keeps the parameters with the best validation accuracy
/// (earliest epoch on ties).
pub fn train(g: &Graph, split: &SplitMasks, cfg: &TrainConfig, seed: u64, exec: Exec) -> Result<TrainOutcome> {
    cfg.validate()?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::validation("training needs non-empty train and validation masks"));
    }
    if let Some(&i) = split.train.iter().chain(&split.val).find(|&&i| g.labels()[i].is_none()) {
        return Err(Error::validation(format!("node {i} is in a mask but unlabeled")));
    }
    let balance = match cfg.sampler {
        SamplerMode::Bemap => Some(compute_balance_table(g, cfg.hops, cfg.delta, exec)?),
        _ => None,
    };
    let sampler = Sampler::new(g, cfg.sampler, cfg.beta, cfg.norm, balance.as_ref())?;
    let mut params = GcnParams::glorot(&cfg.layer_dims(g.num_features()), cfg.activation, !cfg.mlp, seed)?;
    let eval_graph = evaluation_graph(&sampler, seed, exec);
    let adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let labels = g.label_vec();
    let features = g.features();

    let mut log = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, GcnParams)> = None;
    for epoch in 0..cfg.epochs {
        let eg = if cfg.mlp {
            eval_graph.clone()
        } else {
            sampler.sample_epoch(seed, epoch as u64, exec)
        };
        let (train_loss, grads) = loss_and_grads(&params, &eg, features, &labels, &split.train, cfg.weight_decay)?;
        adam_step(&mut params, &grads, &adam);

        let logits: Array2<f64> = forward(&params, &eval_graph, features)?.hidden.pop().expect("logits");
        let val = evaluate(&logits, g, &split.val)?;
        log.push(EpochRecord {
            epoch,
            train_loss,
            val_loss: cross_entropy(&logits, &labels, &split.val),
            val_acc: val.acc,
            val_auc: val.auc,
            val_delta_sp: val.delta_sp,
            val_delta_eo: val.delta_eo,
        });
        if best.as_ref().is_none_or(|(acc, _, _)| val.acc > *acc) {
            best = Some((val.acc, epoch, params.clone()));
        }
    }
    let (_, best_epoch, params) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        params,
        best_epoch,
        log,
        eval_graph,
    })
}
