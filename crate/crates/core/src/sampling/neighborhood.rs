use rand::Rng;

use super::weighted::successive_sample;
use crate::graph::Graph;

/// Size of the retained neighborhood for a node whose self-augmented
/// neighborhood lies in a single group: `min(d, max(4, ⌈β·d⌉))`.
pub fn retained_size_single_group(degree: usize, beta: f64) -> usize {
    let scaled = (beta * degree as f64).ceil() as usize;
    degree.min(scaled.max(4))
}

/// Samples the fair neighborhood of node `i`.
///
/// `weights` are the (unnormalised) sampling weights of `g.neighbors(i)`,
/// in neighbor order. Returns the retained neighbors, sorted, self excluded
/// (self is always part of the aggregation).
///
/// - all of `N̂(i)` in one group: keep `min(d, max(4, ⌈β·d⌉))` neighbors;
/// - otherwise: with `k` the smallest non-zero group count in `N̂(i)`
///   (self included), every present group is cut down to `k` members, self
///   counting towards its own group. For two groups this keeps the whole
///   smaller group and balances the larger one against it.
pub fn sample_fair_neighborhood<R: Rng + ?Sized>(
    g: &Graph,
    i: usize,
    weights: &[f64],
    beta: f64,
    rng: &mut R,
) -> Vec<usize> {
    let nbrs = g.neighbors(i);
    debug_assert_eq!(nbrs.len(), weights.len());
    if nbrs.is_empty() {
        return Vec::new();
    }
    let own = g.group(i);
    let mut counts = vec![0usize; g.num_groups()];
    counts[own] += 1;
    for &j in nbrs {
        counts[g.group(j)] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();

    let mut kept: Vec<usize> = if present == 1 {
        let k = retained_size_single_group(nbrs.len(), beta);
        successive_sample(weights, k, rng).into_iter().map(|p| nbrs[p]).collect()
    } else {
        let k = counts.iter().copied().filter(|&c| c > 0).min().expect("two groups present");
        let mut kept = Vec::with_capacity(k * present);
        let mut positions = Vec::new();
        let mut group_weights = Vec::new();
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            positions.clear();
            positions.extend((0..nbrs.len()).filter(|&p| g.group(nbrs[p]) == s));
            let target = k - usize::from(s == own);
            if target >= positions.len() {
                kept.extend(positions.iter().map(|&p| nbrs[p]));
            } else {
                group_weights.clear();
                group_weights.extend(positions.iter().map(|&p| weights[p]));
                kept.extend(
                    successive_sample(&group_weights, target, rng)
                        .into_iter()
                        .map(|q| nbrs[positions[q]]),
                );
            }
        }
        kept
    };
    kept.sort_unstable();
    kept
}
