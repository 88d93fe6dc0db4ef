//! Seeded synthetic graphs: Gilbert G(n, p) and its two-probability
//! (within/between group) generalisation with group-structured features.

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// Parameters of the synthetic generator.
///
/// Every pair of nodes is joined independently, with probability
/// `p_within` when both endpoints share a group and `p_between` otherwise.
/// Feature 0 is a noisy group indicator: unit-variance Gaussian with group
/// means spread evenly over `[-separation/2, separation/2]`. The remaining
/// features are group-independent standard normals whose scaled sum `u`
/// drives the label:
///
/// `score = label_signal·u + neighbor_label_signal·mean(u over neighbors)
///          + biased_feature_signal·x₀ + label_group_bias·c(s) + label_noise·ε`,
///
/// label = `score > 0`, where `x₀` is feature 0 and `c(s)` is the group's
/// position in `[-1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub nodes: usize,
    pub group_fractions: Vec<f64>,
    pub p_within: f64,
    pub p_between: f64,
    pub feature_dim: usize,
    pub group_separation: f64,
    pub label_signal: f64,
    pub neighbor_label_signal: f64,
    pub biased_feature_signal: f64,
    pub label_group_bias: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            nodes: 1000,
            group_fractions: vec![0.5, 0.5],
            p_within: 0.01,
            p_between: 0.01,
            feature_dim: 8,
            group_separation: 1.0,
            label_signal: 1.0,
            neighbor_label_signal: 0.0,
            biased_feature_signal: 0.0,
            label_group_bias: 0.0,
            label_noise: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// Homophilous graph whose label depends on a group-correlated feature.
    /// Averaging that feature over same-group neighbors pulls it towards its
    /// group mean, which is how vanilla message passing amplifies bias.
    pub fn biased(nodes: usize, seed: u64) -> Self {
        SyntheticSpec {
            nodes,
            group_fractions: vec![0.7, 0.3],
            p_within: 16.0 / nodes as f64,
            p_between: 2.0 / nodes as f64,
            feature_dim: 8,
            group_separation: 1.0,
            label_signal: 0.5,
            neighbor_label_signal: 0.0,
            biased_feature_signal: 1.0,
            label_group_bias: 0.0,
            label_noise: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_within", self.p_within), ("p_between", self.p_between)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} = {p} is not a probability")));
            }
        }
        if self.group_fractions.len() < 2 {
            return Err(Error::validation("at least two group fractions are required"));
        }
        if self.group_fractions.iter().any(|f| !f.is_finite() || *f < 0.0)
            || (self.group_fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::validation("group fractions must be non-negative and sum to 1"));
        }
        if self.feature_dim < 2 {
            return Err(Error::validation("feature_dim must be at least 2"));
        }
        Ok(())
    }
}

/// Gilbert random graph: each unordered pair present independently with
/// probability `p`, groups drawn independently from `group_fractions`.
pub fn generate_gilbert(n: usize, p: f64, group_fractions: &[f64], seed: u64) -> Result<Graph> {
    generate_synthetic(&SyntheticSpec {
        nodes: n,
        group_fractions: group_fractions.to_vec(),
        p_within: p,
        p_between: p,
        seed,
        ..SyntheticSpec::default()
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.nodes;
    let num_groups = spec.group_fractions.len();
    let mut rng = rng::stream(spec.seed, &[tag::GRAPH]);

    let picker = WeightedIndex::new(&spec.group_fractions)
        .map_err(|e| Error::validation(format!("group fractions: {e}")))?;
    let sensitive: Vec<usize> = (0..n).map(|_| picker.sample(&mut rng)).collect();

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if sensitive[i] == sensitive[j] {
                spec.p_within
            } else {
                spec.p_between
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let mut frng = rng::stream(spec.seed, &[tag::FEATURES]);
    let position = |s: usize| s as f64 / (num_groups - 1) as f64 - 0.5;
    let dim = spec.feature_dim;
    let mut features = Array2::<f64>::zeros((n, dim));
    let mut fair = vec![0.0; n];
    for i in 0..n {
        let z: f64 = StandardNormal.sample(&mut frng);
        features[[i, 0]] = spec.group_separation * position(sensitive[i]) + z;
        let mut sum = 0.0;
        for k in 1..dim {
            let v: f64 = StandardNormal.sample(&mut frng);
            features[[i, k]] = v;
            sum += v;
        }
        fair[i] = sum / ((dim - 1) as f64).sqrt();
    }

    let mut adj = vec![Vec::new(); n];
    for &(i, j) in &edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let labels = (0..n)
        .map(|i| {
            let nbr = if adj[i].is_empty() {
                0.0
            } else {
                adj[i].iter().map(|&j| fair[j]).sum::<f64>() / adj[i].len() as f64
            };
            let eps: f64 = StandardNormal.sample(&mut frng);
            let score = spec.label_signal * fair[i]
                + spec.neighbor_label_signal * nbr
                + spec.biased_feature_signal * features[[i, 0]]
                + spec.label_group_bias * position(sensitive[i])
                + spec.label_noise * eps;
            Some(u8::from(score > 0.0))
        })
        .collect();

    Graph::from_edges(n, edges, features, sensitive, num_groups, labels)
}
