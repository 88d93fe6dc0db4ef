use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::{sample_fair_neighborhood, BalanceTable, NormMode, SamplerMode, DEGREE_EXPONENT};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::rng::{self, tag};

/// A sampled neighborhood structure for one epoch with its aggregation
/// weights. Row `i` lists `i` itself first, then the retained neighbors in
/// ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochGraph {
    offsets: Vec<usize>,
    members: Vec<usize>,
    weights: Vec<f64>,
    norm: NormMode,
}

impl EpochGraph {
    /// Builds the aggregation structure from per-node retained neighbor
    /// lists (self excluded).
    pub fn from_neighborhoods(retained: &[Vec<usize>], norm: NormMode) -> Self {
        let mut offsets = Vec::with_capacity(retained.len() + 1);
        let mut members = Vec::with_capacity(retained.iter().map(|r| r.len() + 1).sum());
        offsets.push(0);
        for (i, r) in retained.iter().enumerate() {
            members.push(i);
            members.extend_from_slice(r);
            offsets.push(members.len());
        }
        let size = |i: usize| (offsets[i + 1] - offsets[i]) as f64;
        let mut weights = Vec::with_capacity(members.len());
        for i in 0..retained.len() {
            let si = size(i);
            for &j in &members[offsets[i]..offsets[i + 1]] {
                weights.push(match norm {
                    NormMode::Row => 1.0 / si,
                    NormMode::Symmetric => 1.0 / (si.sqrt() * size(j).sqrt()),
                });
            }
        }
        EpochGraph {
            offsets,
            members,
            weights,
            norm,
        }
    }

    /// Full self-augmented neighborhoods (vanilla message passing).
    pub fn full(g: &Graph, norm: NormMode) -> Self {
        let retained: Vec<Vec<usize>> = (0..g.num_nodes()).map(|i| g.neighbors(i).to_vec()).collect();
        Self::from_neighborhoods(&retained, norm)
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn norm(&self) -> NormMode {
        self.norm
    }

    /// Retained neighbors of `i`, self excluded.
    pub fn retained(&self, i: usize) -> &[usize] {
        &self.members[self.offsets[i] + 1..self.offsets[i + 1]]
    }

    /// `(members, α)` of row `i`, self first.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.members[r.clone()], &self.weights[r])
    }

    /// `|N̂_fair(i)|`, self included.
    pub fn size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// `ĥ_i = Σ_j α_ij h_j`.
    pub fn aggregate(&self, h: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(h.nrows(), self.num_nodes(), "row count must match node count");
        let mut out = Array2::zeros(h.raw_dim());
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let (members, alphas) = self.row(i);
            for (&j, &a) in members.iter().zip(alphas) {
                row.scaled_add(a, &h.row(j));
            }
        }
        out
    }

    /// Adjoint of [`EpochGraph::aggregate`]: `g_j = Σ_i α_ij ĝ_i`.
    pub fn aggregate_transpose(&self, grad: ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(grad.nrows(), self.num_nodes(), "row count must match node count");
        let mut out = Array2::zeros(grad.raw_dim());
        for i in 0..self.num_nodes() {
            let (members, alphas) = self.row(i);
            for (&j, &a) in members.iter().zip(alphas) {
                out.row_mut(j).scaled_add(a, &grad.row(i));
            }
        }
        out
    }
}

/// Per-graph sampler state: the mode, β, normalisation and the per-edge
/// weights the mode draws with.
#[derive(Clone, Debug)]
pub struct Sampler<'g> {
    graph: &'g Graph,
    mode: SamplerMode,
    beta: f64,
    norm: NormMode,
    weights: Vec<f64>,
}

impl<'g> Sampler<'g> {
    /// `balance` is required for [`SamplerMode::Bemap`] and ignored otherwise.
    pub fn new(
        graph: &'g Graph,
        mode: SamplerMode,
        beta: f64,
        norm: NormMode,
        balance: Option<&BalanceTable>,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::validation(format!("beta must lie in (0, 1], got {beta}")));
        }
        let weights = match mode {
            SamplerMode::None | SamplerMode::Uniform => vec![1.0; graph.num_directed_edges()],
            SamplerMode::Degree => (0..graph.num_nodes())
                .flat_map(|i| graph.neighbors(i).iter().map(|&j| (graph.degree(j) as f64).powf(DEGREE_EXPONENT)))
                .collect(),
            SamplerMode::Bemap => {
                let bt = balance.ok_or_else(|| Error::validation("bemap sampling needs a balance table"))?;
                if bt.prob().len() != graph.num_directed_edges() {
                    return Err(Error::validation("balance table was computed for a different graph"));
                }
                bt.prob().to_vec()
            }
        };
        Ok(Sampler {
            graph,
            mode,
            beta,
            norm,
            weights,
        })
    }

    pub fn mode(&self) -> SamplerMode {
        self.mode
    }

    pub fn norm(&self) -> NormMode {
        self.norm
    }

    pub fn neighbor_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.graph.edge_range(i)]
    }

    pub fn sample_node<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Vec<usize> {
        match self.mode {
            SamplerMode::None => self.graph.neighbors(i).to_vec(),
            _ => sample_fair_neighborhood(self.graph, i, self.neighbor_weights(i), self.beta, rng),
        }
    }

    /// Samples every node's neighborhood for `epoch`. Node `i` draws from
    /// the stream `(seed, epoch, i)`, so the result is independent of `exec`.
    pub fn sample_epoch(&self, seed: u64, epoch: u64, exec: Exec) -> EpochGraph {
        if self.mode == SamplerMode::None {
            return EpochGraph::full(self.graph, self.norm);
        }
        let retained = exec.map(self.graph.num_nodes(), |i| {
            let mut rng = rng::stream(seed, &[tag::SAMPLE, epoch, i as u64]);
            self.sample_node(i, &mut rng)
        });
        EpochGraph::from_neighborhoods(&retained, self.norm)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sample_epoch_graph(
    g: &Graph,
    balance: Option<&BalanceTable>,
    mode: SamplerMode,
    beta: f64,
    norm: NormMode,
    seed: u64,
    epoch: u64,
    exec: Exec,
) -> Result<EpochGraph> {
    Ok(Sampler::new(g, mode, beta, norm, balance)?.sample_epoch(seed, epoch, exec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticSpec};
    use crate::sampling::compute_balance_table;

    fn cycle4() -> Graph {
        Graph::from_edges(
            4,
            [(0, 1), (1, 2), (2, 3), (3, 0)],
            Array2::zeros((4, 1)),
            vec![0, 1, 0, 1],
            2,
            vec![None; 4],
        )
        .unwrap()
    }

    #[test]
    fn none_mode_is_full_graph_with_row_weights() {
        let g = generate_synthetic(&SyntheticSpec::biased(120, 1)).unwrap();
        let eg = sample_epoch_graph(&g, None, SamplerMode::None, 0.25, NormMode::Row, 0, 0, Exec::Sequential).unwrap();
        for i in 0..g.num_nodes() {
            assert_eq!(eg.retained(i), g.neighbors(i));
            let (_, w) = eg.row(i);
            let expect = 1.0 / (g.degree(i) + 1) as f64;
            assert!(w.iter().all(|&a| a == expect));
        }
    }

    #[test]
    fn row_weights_sum_to_one_and_symmetric_matches_formula() {
        let g = generate_synthetic(&SyntheticSpec::biased(200, 2)).unwrap();
        let bt = compute_balance_table(&g, 2, 1.0, Exec::Sequential).unwrap();
        for norm in [NormMode::Row, NormMode::Symmetric] {
            let eg = sample_epoch_graph(&g, Some(&bt), SamplerMode::Bemap, 0.25, norm, 3, 1, Exec::default()).unwrap();
            for i in 0..g.num_nodes() {
                let (members, w) = eg.row(i);
                assert_eq!(members[0], i);
                match norm {
                    NormMode::Row => assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12),
                    NormMode::Symmetric => {
                        for (&j, &a) in members.iter().zip(w) {
                            let expect = 1.0 / ((eg.size(i) as f64).sqrt() * (eg.size(j) as f64).sqrt());
                            assert_eq!(a, expect);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bemap_balances_every_mixed_node() {
        let g = generate_synthetic(&SyntheticSpec::biased(300, 3)).unwrap();
        let bt = compute_balance_table(&g, 2, 1.0, Exec::Sequential).unwrap();
        let eg = sample_epoch_graph(&g, Some(&bt), SamplerMode::Bemap, 0.25, NormMode::Row, 9, 0, Exec::default()).unwrap();
        for i in 0..g.num_nodes() {
            let mixed = g.neighbors(i).iter().any(|&j| g.group(j) != g.group(i));
            if mixed {
                let mut c = [0usize; 2];
                c[g.group(i)] += 1;
                for &j in eg.retained(i) {
                    c[g.group(j)] += 1;
                }
                assert_eq!(c[0], c[1], "node {i}");
            }
            assert!(eg.retained(i).iter().all(|j| g.has_edge(i, *j)));
        }
    }

    #[test]
    fn deterministic_and_exec_independent() {
        let g = generate_synthetic(&SyntheticSpec::biased(300, 4)).unwrap();
        let bt = compute_balance_table(&g, 2, 1.0, Exec::Sequential).unwrap();
        for mode in [SamplerMode::Bemap, SamplerMode::Uniform, SamplerMode::Degree] {
            let s = Sampler::new(&g, mode, 0.25, NormMode::Row, Some(&bt)).unwrap();
            let a = s.sample_epoch(5, 7, Exec::Sequential);
            let b = s.sample_epoch(5, 7, Exec::Parallel);
            assert_eq!(a, b);
            assert_ne!(a, s.sample_epoch(5, 8, Exec::Sequential));
        }
    }

    #[test]
    fn sampler_validation() {
        let g = cycle4();
        assert!(Sampler::new(&g, SamplerMode::Bemap, 0.25, NormMode::Row, None).is_err());
        assert!(Sampler::new(&g, SamplerMode::Uniform, 0.0, NormMode::Row, None).is_err());
        assert!(Sampler::new(&g, SamplerMode::Uniform, 1.5, NormMode::Row, None).is_err());
    }

    #[test]
    fn degree_weights_follow_power_law() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (2, 3), (2, 4)], Array2::zeros((5, 1)), vec![0, 1, 0, 1, 0], 2, vec![None; 5]).unwrap();
        let s = Sampler::new(&g, SamplerMode::Degree, 0.25, NormMode::Row, None).unwrap();
        assert_eq!(s.neighbor_weights(0), &[1.0, 3f64.powf(0.75)]);
    }

    #[test]
    fn aggregate_and_transpose_are_adjoint() {
        let g = cycle4();
        let eg = EpochGraph::full(&g, NormMode::Symmetric);
        let h = ndarray::array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [-2.0, 1.0]];
        let u = ndarray::array![[0.3, 1.0], [2.0, 0.1], [-1.0, 0.4], [0.2, 0.2]];
        let lhs = (&eg.aggregate(h.view()) * &u).sum();
        let rhs = (&h * &eg.aggregate_transpose(u.view())).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
