//! Immutable undirected graph with node features, sensitive attributes and
//! labels, plus the neighborhood queries the sampler and probe need.

mod io;
mod synth;

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{self, tag};

pub use io::{load_graph, write_edge_list, write_node_table};
pub use synth::{generate_gilbert, generate_synthetic, SyntheticSpec};

/// Undirected graph in compressed sparse row form.
///
/// Neighbor lists are sorted and duplicate-free, self-loops are never stored.
/// Directed edge `(i, neighbors(i)[k])` has the global index
/// `edge_range(i).start + k`, which is how per-edge tables are addressed.
#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    features: Array2<f64>,
    sensitive: Vec<usize>,
    num_groups: usize,
    labels: Vec<Option<u8>>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges are symmetrised,
    /// deduplicated and self-loops dropped.
    pub fn from_edges<I>(
        num_nodes: usize,
        edges: I,
        features: Array2<f64>,
        sensitive: Vec<usize>,
        num_groups: usize,
        labels: Vec<Option<u8>>,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if features.nrows() != num_nodes || sensitive.len() != num_nodes || labels.len() != num_nodes {
            return Err(Error::validation(format!(
                "node arrays disagree with node count {num_nodes}: features {}, sensitive {}, labels {}",
                features.nrows(),
                sensitive.len(),
                labels.len()
            )));
        }
        if num_groups < 2 {
            return Err(Error::validation("at least two sensitive groups are required"));
        }
        if let Some((i, &s)) = sensitive.iter().enumerate().find(|(_, &s)| s >= num_groups) {
            return Err(Error::validation(format!(
                "node {i}: sensitive value {s} out of range 0..{num_groups}"
            )));
        }
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, l)| matches!(l, Some(v) if *v > 1)) {
            return Err(Error::validation(format!("node {i}: label {l:?} is not binary")));
        }

        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Ok(Graph {
            offsets,
            targets,
            features,
            sensitive,
            num_groups,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn num_directed_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree(i)).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.num_nodes() == 0 {
            return 0.0;
        }
        self.targets.len() as f64 / self.num_nodes() as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn sensitive(&self) -> &[usize] {
        &self.sensitive
    }

    pub fn group(&self, i: usize) -> usize {
        self.sensitive[i]
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn is_binary(&self) -> bool {
        self.num_groups == 2
    }

    pub fn labels(&self) -> &[Option<u8>] {
        &self.labels
    }

    /// Labels with unlabeled nodes mapped to 0; only meaningful under a mask
    /// of labeled nodes.
    pub fn label_vec(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.unwrap_or(0)).collect()
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_groups];
        for &s in &self.sensitive {
            sizes[s] += 1;
        }
        sizes
    }

    /// Most populous group; ties go to the lower id.
    pub fn majority_group(&self) -> usize {
        let sizes = self.group_sizes();
        let mut best = 0;
        for (s, &c) in sizes.iter().enumerate() {
            if c > sizes[best] {
                best = s;
            }
        }
        best
    }

    /// Standardizes every feature column to zero mean and unit variance.
    /// Constant columns are centred only.
    pub fn standardize_features(&mut self) {
        standardize_columns(&mut self.features);
    }

    /// Returns a copy with nodes relabelled so that old node `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::validation("permutation is not a bijection on the node set"));
        }
        let mut features = Array2::zeros(self.features.raw_dim());
        let mut sensitive = vec![0; n];
        let mut labels = vec![None; n];
        for i in 0..n {
            features.row_mut(perm[i]).assign(&self.features.row(i));
            sensitive[perm[i]] = self.sensitive[i];
            labels[perm[i]] = self.labels[i];
        }
        let edges = (0..n).flat_map(|i| self.neighbors(i).iter().map(move |&j| (perm[i], perm[j])));
        Graph::from_edges(n, edges, features, sensitive, self.num_groups, labels)
    }

    /// Returns a copy without the undirected edge `{i, j}`.
    pub fn without_edge(&self, i: usize, j: usize) -> Graph {
        let edges = (0..self.num_nodes()).flat_map(|u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| !((u == i && v == j) || (u == j && v == i)))
                .map(move |&v| (u, v))
        });
        Graph::from_edges(
            self.num_nodes(),
            edges.collect::<Vec<_>>(),
            self.features.clone(),
            self.sensitive.clone(),
            self.num_groups,
            self.labels.clone(),
        )
        .expect("removing an edge keeps a valid graph")
    }
}

pub(crate) fn standardize_columns(m: &mut Array2<f64>) {
    if m.nrows() == 0 {
        return;
    }
    let n = m.nrows() as f64;
    for mut col in m.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean });
    }
}

/// Per-node counts, by group, of the distinct nodes at BFS distance
/// `1..=hops` (the node itself excluded).
pub fn khop_group_counts(g: &Graph, hops: usize, exec: Exec) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    exec.map_init(
        n,
        || (vec![usize::MAX; n], Vec::new(), Vec::new()),
        |(stamp, frontier, next), src| {
            let mut counts = vec![0; g.num_groups()];
            stamp[src] = src;
            frontier.clear();
            frontier.push(src);
            for _ in 0..hops {
                next.clear();
                for &u in frontier.iter() {
                    for &v in g.neighbors(u) {
                        if stamp[v] != src {
                            stamp[v] = src;
                            counts[g.group(v)] += 1;
                            next.push(v);
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                std::mem::swap(frontier, next);
            }
            counts
        },
    )
}

/// Fraction of `i`'s 1-hop neighbors in the dataset-wide majority group;
/// 0 for isolated nodes.
pub fn majority_neighbor_ratio(g: &Graph, i: usize) -> f64 {
    majority_neighbor_ratio_with(g, i, g.majority_group())
}

fn majority_neighbor_ratio_with(g: &Graph, i: usize, majority: usize) -> f64 {
    let nbrs = g.neighbors(i);
    if nbrs.is_empty() {
        return 0.0;
    }
    nbrs.iter().filter(|&&j| g.group(j) == majority).count() as f64 / nbrs.len() as f64
}

pub fn majority_neighbor_ratios(g: &Graph) -> Vec<f64> {
    let majority = g.majority_group();
    (0..g.num_nodes())
        .map(|i| majority_neighbor_ratio_with(g, i, majority))
        .collect()
}

/// Number of equal-width bins on `[0, 1]` used for neighbor-ratio histograms.
pub const RATIO_BINS: usize = 10;

/// Bin of a ratio in `[0, 1]`: `[0, 0.1), …, [0.9, 1.0]` with the last bin closed.
pub fn ratio_bin(r: f64) -> usize {
    ((r * RATIO_BINS as f64).floor() as usize).min(RATIO_BINS - 1)
}

pub fn ratio_histogram(g: &Graph) -> [usize; RATIO_BINS] {
    let mut hist = [0; RATIO_BINS];
    for r in majority_neighbor_ratios(g) {
        hist[ratio_bin(r)] += 1;
    }
    hist
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.5,
            val: 0.25,
            test: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitMasks {
    pub fn is_disjoint(&self) -> bool {
        let mut all = BTreeSet::new();
        self.train
            .iter()
            .chain(&self.val)
            .chain(&self.test)
            .all(|&i| all.insert(i))
    }
}

/// Shuffles the labeled nodes with `seed` and cuts them into
/// train/validation/test. Each mask is returned sorted.
pub fn make_splits(g: &Graph, fractions: SplitFractions, seed: u64) -> Result<SplitMasks> {
    let SplitFractions { train, val, test } = fractions;
    if [train, val, test].iter().any(|f| !f.is_finite() || *f < 0.0) || ((train + val + test) - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "split fractions ({train}, {val}, {test}) must be non-negative and sum to 1"
        )));
    }
    let mut nodes = g.labeled_nodes();
    nodes.shuffle(&mut rng::stream(seed, &[tag::SPLIT]));
    let m = nodes.len();
    let n_train = ((train * m as f64).round() as usize).min(m);
    let n_val = ((val * m as f64).round() as usize).min(m - n_train);
    let cut = |range: std::ops::Range<usize>| {
        let mut v = nodes[range].to_vec();
        v.sort_unstable();
        v
    };
    Ok(SplitMasks {
        train: cut(0..n_train),
        val: cut(n_train..n_train + n_val),
        test: cut(n_train + n_val..m),
    })
}
