mod common;

use std::collections::VecDeque;

use bemap::graph::{generate_synthetic, khop_group_counts, Graph, SyntheticSpec};
use bemap::model::{load_checkpoint, save_checkpoint, Activation, GcnParams};
use bemap::sampling::{
    balance_score, compute_balance_table, sample_fair_neighborhood, EpochGraph, NormMode, Sampler, SamplerMode,
};
use bemap::Exec;
use common::{inclusion_probabilities, normalized_tv, rng};
use ndarray::Array2;

fn random_graph(seed: u64, n: usize, p: f64, groups: usize) -> Graph {
    use rand::Rng;
    let mut r = rng(seed);
    let sensitive: Vec<usize> = (0..n).map(|i| if i < groups { i } else { r.random_range(0..groups) }).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges, Array2::zeros((n, 1)), sensitive, groups, vec![Some(0); n]).unwrap()
}

/// Group counts among nodes at distance 1..=hops, by plain BFS.
fn bfs_counts(g: &Graph, i: usize, hops: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.num_nodes()];
    dist[i] = 0;
    let mut q = VecDeque::from([i]);
    let mut counts = vec![0; g.num_groups()];
    while let Some(u) = q.pop_front() {
        if dist[u] == hops {
            continue;
        }
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                counts[g.group(v)] += 1;
                q.push_back(v);
            }
        }
    }
    counts
}

#[test]
fn khop_counts_match_bfs() {
    for seed in 0..20 {
        let g = random_graph(seed, 30, 0.08, 2 + (seed as usize % 2));
        for hops in 1..=3 {
            let counts = khop_group_counts(&g, hops, Exec::default());
            for i in 0..g.num_nodes() {
                assert_eq!(counts[i], bfs_counts(&g, i, hops), "seed {seed} node {i} hops {hops}");
            }
        }
    }
}

#[test]
fn balance_table_matches_definition() {
    for seed in 0..10 {
        let g = random_graph(seed, 25, 0.15, 2);
        let table = compute_balance_table(&g, 2, 1.0, Exec::Sequential).unwrap();
        for i in 0..g.num_nodes() {
            let c = bfs_counts(&g, i, 2);
            let expect = 1.0 / ((c[0] as f64 - c[1] as f64).abs() + 1.0);
            assert!((table.balance()[i] - expect).abs() < 1e-15);
            assert!((balance_score(&c, 1.0) - expect).abs() < 1e-15);
        }
        for i in 0..g.num_nodes() {
            let nbrs = g.neighbors(i);
            if nbrs.is_empty() {
                continue;
            }
            let total: f64 = nbrs.iter().map(|&j| table.balance()[j]).sum();
            for (&j, &p) in nbrs.iter().zip(table.neighbor_probs(&g, i)) {
                assert!((p - table.balance()[j] / total).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn epoch_weights_match_definition() {
    let g = random_graph(4, 40, 0.1, 2);
    let table = compute_balance_table(&g, 2, 1.0, Exec::default()).unwrap();
    for norm in [NormMode::Row, NormMode::Symmetric] {
        let s = Sampler::new(&g, SamplerMode::Bemap, 0.25, norm, Some(&table)).unwrap();
        let eg = s.sample_epoch(1, 0, Exec::default());
        for i in 0..g.num_nodes() {
            let (members, w) = eg.row(i);
            assert_eq!(members[0], i);
            for (&j, &a) in members.iter().zip(w) {
                let expect = match norm {
                    NormMode::Row => 1.0 / eg.size(i) as f64,
                    NormMode::Symmetric => 1.0 / ((eg.size(i) * eg.size(j)) as f64).sqrt(),
                };
                assert!((a - expect).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn full_graph_uses_inverse_degree_plus_one() {
    let g = random_graph(2, 20, 0.2, 2);
    let eg = EpochGraph::full(&g, NormMode::Row);
    for i in 0..g.num_nodes() {
        assert_eq!(eg.size(i), g.degree(i) + 1);
        assert!(eg.row(i).1.iter().all(|&a| (a - 1.0 / (g.degree(i) + 1) as f64).abs() < 1e-15));
    }
}

#[test]
fn single_group_draws_match_successive_sampling() {
    // Star: center and 6 leaves in group 0, one isolated node in group 1.
    let n = 8;
    let mut s = vec![0; n];
    s[7] = 1;
    let g = Graph::from_edges(n, (1..7).map(|j| (0, j)), Array2::zeros((n, 1)), s, 2, vec![Some(0); n]).unwrap();
    let weights = [1.0, 2.0, 3.0, 0.5, 4.0, 1.5];
    let exact = inclusion_probabilities(&weights, 4);
    let draws = 40_000;
    let mut counts = [0.0; 6];
    let mut r = rng(9);
    for _ in 0..draws {
        let kept = sample_fair_neighborhood(&g, 0, &weights, 0.25, &mut r);
        assert_eq!(kept.len(), 4);
        for j in kept {
            counts[j - 1] += 1.0;
        }
    }
    assert!(normalized_tv(&counts, &exact) < 0.01);
    for (c, e) in counts.iter().zip(&exact) {
        assert!((c / draws as f64 - e).abs() < 0.015, "{c} vs {e}");
    }
}

#[test]
fn checkpoint_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (k, act) in [Activation::Relu, Activation::Linear].into_iter().enumerate() {
        let p = GcnParams::glorot(&[5, 7, 3, 2], act, k == 0, k as u64).unwrap();
        let path = dir.path().join(format!("m{k}.ckpt"));
        save_checkpoint(&path, &p).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), p);
    }
}

#[test]
fn biased_generator_is_homophilous() {
    let g = generate_synthetic(&SyntheticSpec::biased(1500, 3)).unwrap();
    let mut same = 0;
    let mut total = 0;
    for i in 0..g.num_nodes() {
        for &j in g.neighbors(i) {
            same += usize::from(g.group(i) == g.group(j));
            total += 1;
        }
    }
    assert!(same as f64 / total as f64 > 0.8);
}
