//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use bemap::model::{loss_and_grads, Activation, GcnParams};
use bemap::sampling::{EpochGraph, NormMode};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// gradient oracle

pub struct GradInstance {
    pub params: GcnParams,
    pub eg: EpochGraph,
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub mask: Vec<usize>,
    pub weight_decay: f64,
}

/// Random graph with random retained neighborhoods, n ≤ 15, F ≤ 6.
pub fn grad_instance(seed: u64, act: Activation, norm: NormMode, message_passing: bool) -> GradInstance {
    let mut r = rng(seed);
    let n = r.random_range(3..=15);
    let f = r.random_range(1..=6);
    let hidden = r.random_range(2..=5);
    let retained: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && r.random::<f64>() < 0.3).collect())
        .collect();
    let eg = EpochGraph::from_neighborhoods(&retained, norm);
    let features = Array2::from_shape_fn((n, f), |_| r.random_range(-2.0..2.0));
    let labels = (0..n).map(|_| r.random_range(0..2u8)).collect();
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut r);
    let mask = nodes[..r.random_range(1..=n)].to_vec();
    let params = GcnParams::glorot(&[f, hidden, 2], act, message_passing, seed).unwrap();
    GradInstance {
        params,
        eg,
        features,
        labels,
        mask,
        weight_decay: 1e-2,
    }
}

/// Largest relative error between the analytic gradient and central
/// differences. The relative error uses `max(|a|, |n|, 1e-6)` as scale.
pub fn max_gradient_error(inst: &GradInstance) -> f64 {
    let loss = |p: &GcnParams| {
        loss_and_grads(p, &inst.eg, inst.features.view(), &inst.labels, &inst.mask, inst.weight_decay)
            .unwrap()
            .0
    };
    let (_, grads) =
        loss_and_grads(&inst.params, &inst.eg, inst.features.view(), &inst.labels, &inst.mask, inst.weight_decay)
            .unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (l, g) in grads.iter().enumerate() {
        for ((a, b), &analytic) in ndarray::indices(g.dim()).into_iter().zip(g.iter()) {
            let mut plus = inst.params.clone();
            plus.weights[l][[a, b]] += h;
            let mut minus = inst.params.clone();
            minus.weights[l][[a, b]] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// metric oracles (plain counting, no sorting)

pub fn brute_delta_sp(pred: &[u8], s: &[usize], mask: &[usize]) -> f64 {
    let rate = |g: usize| {
        let members: Vec<usize> = mask.iter().copied().filter(|&i| s[i] == g).collect();
        members.iter().filter(|&&i| pred[i] == 1).count() as f64 / members.len() as f64
    };
    (rate(0) - rate(1)).abs()
}

pub fn brute_delta_eo(pred: &[u8], y: &[u8], s: &[usize], mask: &[usize]) -> f64 {
    let tpr = |g: usize| {
        let members: Vec<usize> = mask.iter().copied().filter(|&i| s[i] == g && y[i] == 1).collect();
        members.iter().filter(|&&i| pred[i] == 1).count() as f64 / members.len() as f64
    };
    (tpr(0) - tpr(1)).abs()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties = 1/2.
pub fn brute_auc(scores: &[f64], y: &[u8], mask: &[usize]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for &i in mask.iter().filter(|&&i| y[i] == 1) {
        for &j in mask.iter().filter(|&&j| y[j] == 0) {
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn brute_distance_bias(e: &Array2<f64>, s: &[usize], mask: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in mask {
        let same: Vec<usize> = mask.iter().copied().filter(|&j| s[j] == s[i]).collect();
        let mut d2 = 0.0;
        for k in 0..e.ncols() {
            let c = same.iter().map(|&j| e[[j, k]]).sum::<f64>() / same.len() as f64;
            d2 += (e[[i, k]] - c).powi(2);
        }
        total += d2;
    }
    mask.len() as f64 / total
}

pub struct MetricInstance {
    pub pred: Vec<u8>,
    pub labels: Vec<u8>,
    pub sensitive: Vec<usize>,
    pub scores: Vec<f64>,
    pub embeddings: Array2<f64>,
    pub mask: Vec<usize>,
}

/// Random instance with both groups and, within each group, both labels
/// present in the mask. Scores are coarse so ties occur.
pub fn metric_instance(seed: u64) -> MetricInstance {
    let mut r = rng(seed);
    loop {
        let n = r.random_range(8..60);
        let sensitive: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        let pred: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        let scores: Vec<f64> = (0..n).map(|_| (r.random::<f64>() * 10.0).round() / 10.0).collect();
        let dim = r.random_range(1..5);
        let embeddings = Array2::from_shape_fn((n, dim), |_| r.random_range(-3.0..3.0));
        let mask: Vec<usize> = (0..n).filter(|_| r.random::<f64>() < 0.7).collect();
        let ok = (0..2).all(|g| (0..2u8).all(|y| mask.iter().any(|&i| sensitive[i] == g && labels[i] == y)));
        if ok {
            return MetricInstance {
                pred,
                labels,
                sensitive,
                scores,
                embeddings,
                mask,
            };
        }
    }
}

// ---------------------------------------------------------------------------
// successive sampling oracle

/// Exact inclusion probability of every item when `k` items are drawn
/// without replacement, each draw proportional to the remaining weights.
/// Enumerates every ordered draw sequence.
pub fn inclusion_probabilities(weights: &[f64], k: usize) -> Vec<f64> {
    fn walk(w: &[f64], k: usize, taken: &mut Vec<usize>, prob: f64, out: &mut [f64]) {
        if taken.len() == k {
            for &t in taken.iter() {
                out[t] += prob;
            }
            return;
        }
        let rest: f64 = (0..w.len()).filter(|j| !taken.contains(j)).map(|j| w[j]).sum();
        for j in 0..w.len() {
            if taken.contains(&j) {
                continue;
            }
            taken.push(j);
            walk(w, k, taken, prob * w[j] / rest, out);
            taken.pop();
        }
    }
    let mut out = vec![0.0; weights.len()];
    if k >= weights.len() {
        out.iter_mut().for_each(|v| *v = 1.0);
        return out;
    }
    walk(weights, k, &mut Vec::new(), 1.0, &mut out);
    out
}

/// Total variation distance between two vectors after normalising each to
/// sum to one.
pub fn normalized_tv(a: &[f64], b: &[f64]) -> f64 {
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    0.5 * a.iter().zip(b).map(|(x, y)| (x / sa - y / sb).abs()).sum::<f64>()
}
