use rand::Rng;

/// Draws `k` distinct positions from `weights` by successive sampling:
/// pick one position with probability proportional to its weight, remove
/// it, renormalise the rest, repeat. Positions come back in draw order.
///
/// `k >= weights.len()` returns every position. Weights must be
/// non-negative; if all remaining weights are zero the rest are drawn
/// uniformly.
pub fn successive_sample<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Vec<usize> {
    let m = weights.len();
    if k >= m {
        return (0..m).collect();
    }
    let mut remaining: Vec<f64> = weights.to_vec();
    let mut taken = vec![false; m];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = remaining.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = None;
            for (pos, &w) in remaining.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                chosen = Some(pos);
                if u < w {
                    break;
                }
                u -= w;
            }
            chosen.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..m).filter(|&p| !taken[p]).collect();
            free[rng.random_range(0..free.len())]
        };
        taken[pick] = true;
        remaining[pick] = 0.0;
        out.push(pick);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::HashMap;

    /// Exact probability of each k-subset under successive sampling, by
    /// enumerating every ordered draw sequence.
    fn exact_subset_distribution(w: &[f64], k: usize) -> HashMap<Vec<usize>, f64> {
        fn rec(w: &[f64], k: usize, seq: &mut Vec<usize>, p: f64, out: &mut HashMap<Vec<usize>, f64>) {
            if seq.len() == k {
                let mut key = seq.clone();
                key.sort_unstable();
                *out.entry(key).or_default() += p;
                return;
            }
            let rest: f64 = (0..w.len()).filter(|i| !seq.contains(i)).map(|i| w[i]).sum();
            for i in 0..w.len() {
                if !seq.contains(&i) {
                    seq.push(i);
                    rec(w, k, seq, p * w[i] / rest, out);
                    seq.pop();
                }
            }
        }
        let mut out = HashMap::new();
        rec(w, k, &mut Vec::new(), 1.0, &mut out);
        out
    }

    fn empirical_tv(w: &[f64], k: usize, draws: usize, seed: u64) -> f64 {
        let exact = exact_subset_distribution(w, k);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            let mut s = successive_sample(w, k, &mut rng);
            s.sort_unstable();
            *counts.entry(s).or_default() += 1;
        }
        let mut tv = 0.0;
        for (key, p) in &exact {
            let q = *counts.get(key).unwrap_or(&0) as f64 / draws as f64;
            tv += (p - q).abs();
        }
        for key in counts.keys() {
            assert!(exact.contains_key(key), "impossible subset {key:?}");
        }
        tv / 2.0
    }

    #[test]
    fn matches_enumeration_oracle() {
        let cases: [(&[f64], usize); 4] = [
            (&[0.1, 0.2, 0.3, 0.15, 0.25, 0.4], 3),
            (&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], 2),
            (&[0.5, 0.05, 0.05, 0.4], 2),
            (&[1.0, 1.0, 1.0, 1.0, 1.0], 1),
        ];
        for (i, (w, k)) in cases.iter().enumerate() {
            let tv = empirical_tv(w, *k, 100_000, i as u64);
            assert!(tv <= 0.01, "case {i}: tv = {tv}");
        }
    }

    #[test]
    fn uniform_three_of_six_is_uniform_over_twenty_subsets() {
        let w = [1.0; 6];
        let draws = 60_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            let mut s = successive_sample(&w, 3, &mut rng);
            s.sort_unstable();
            *counts.entry(s).or_default() += 1;
        }
        assert_eq!(counts.len(), 20);
        let p = 1.0 / 20.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - draws as f64 * p).abs() <= 3.0 * sigma + 1.0);
        }
    }

    #[test]
    fn edge_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert_eq!(successive_sample(&[1.0, 2.0], 5, &mut rng), vec![0, 1]);
        assert!(successive_sample(&[1.0, 2.0], 0, &mut rng).is_empty());
        let s = successive_sample(&[0.0, 0.0, 0.0], 2, &mut rng);
        assert_eq!(s.len(), 2);
        assert_ne!(s[0], s[1]);
        // zero-weight entries are never chosen while positive weight remains
        for _ in 0..100 {
            assert_eq!(successive_sample(&[0.0, 3.0, 0.0], 1, &mut rng), vec![1]);
        }
    }
}
