use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{khop_group_counts, Graph};

/// Per-node balance scores and per-directed-edge sampling probabilities.
///
/// `prob[e]` for the directed edge `e = (i, j)` is `P(j | i)`; the entries
/// for node `i` live at `g.edge_range(i)` and sum to one.
#[derive(Clone, Debug, Serialize)]
pub struct BalanceTable {
    balance: Vec<f64>,
    prob: Vec<f64>,
    hops: usize,
    delta: f64,
}

impl BalanceTable {
    pub fn balance(&self) -> &[f64] {
        &self.balance
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    /// `P(j | i)` for `j` in `g.neighbors(i)`, in neighbor order.
    pub fn neighbor_probs(&self, g: &Graph, i: usize) -> &[f64] {
        &self.prob[g.edge_range(i)]
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `1 / (|n0 - n1| + δ)`.
pub fn binary_balance_score(n0: usize, n1: usize, delta: f64) -> f64 {
    1.0 / (n0.abs_diff(n1) as f64 + delta)
}

/// `1 / (√(mean over unordered group pairs of (n_k - n_j)²) + δ)`.
pub fn pairwise_balance_score(counts: &[usize], delta: f64) -> f64 {
    let s = counts.len();
    let mut sum = 0.0;
    for k in 0..s {
        for j in k + 1..s {
            let d = counts[k] as f64 - counts[j] as f64;
            sum += d * d;
        }
    }
    let pairs = (s * (s - 1) / 2).max(1) as f64;
    1.0 / ((sum / pairs).sqrt() + delta)
}

/// Balance score for a node with per-group neighbor counts `counts`.
pub fn balance_score(counts: &[usize], delta: f64) -> f64 {
    match counts {
        [n0, n1] => binary_balance_score(*n0, *n1, delta),
        _ => pairwise_balance_score(counts, delta),
    }
}

pub fn compute_balance_table(g: &Graph, hops: usize, delta: f64, exec: Exec) -> Result<BalanceTable> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::validation(format!("delta must be positive, got {delta}")));
    }
    if hops == 0 {
        return Err(Error::validation("hops must be at least 1"));
    }
    let counts = khop_group_counts(g, hops, exec);
    let balance: Vec<f64> = counts.iter().map(|c| balance_score(c, delta)).collect();
    let per_node = exec.map(g.num_nodes(), |i| {
        let nbrs = g.neighbors(i);
        let total: f64 = nbrs.iter().map(|&j| balance[j]).sum();
        nbrs.iter().map(|&j| balance[j] / total).collect::<Vec<_>>()
    });
    Ok(BalanceTable {
        balance,
        prob: per_node.concat(),
        hops,
        delta,
    })
}
