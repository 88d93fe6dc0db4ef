//! Sensitive-attribute leakage probe: a logistic regression trained to
//! recover the group of a node from its embedding, scored per
//! majority-neighbor-ratio bin.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{majority_neighbor_ratios, ratio_bin, Graph, SplitMasks, RATIO_BINS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            iterations: 500,
            learning_rate: 0.1,
        }
    }
}

/// Binary logistic regression on column-standardized inputs.
#[derive(Clone, Debug)]
pub struct LogisticProbe {
    mean: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
}

impl LogisticProbe {
    fn logit(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut z = self.bias;
        for k in 0..self.weights.len() {
            z += self.weights[k] * (x[k] - self.mean[k]) / self.scale[k];
        }
        z
    }

    pub fn predict_proba(&self, x: ArrayView1<'_, f64>) -> f64 {
        1.0 / (1.0 + (-self.logit(x)).exp())
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> u8 {
        u8::from(self.logit(x) > 0.0)
    }
}

/// Full-batch gradient descent on the mean logistic loss over `rows`,
/// starting from zero, without regularisation. Columns are standardized
/// with statistics of `rows`.
pub fn fit_logistic(x: ArrayView2<'_, f64>, y: &[u8], rows: &[usize], cfg: &ProbeConfig) -> LogisticProbe {
    let dim = x.ncols();
    let m = rows.len().max(1) as f64;
    let mut mean = vec![0.0; dim];
    for &i in rows {
        for k in 0..dim {
            mean[k] += x[[i, k]] / m;
        }
    }
    let mut scale = vec![0.0; dim];
    for &i in rows {
        for k in 0..dim {
            scale[k] += (x[[i, k]] - mean[k]).powi(2) / m;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let std_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| (0..dim).map(|k| (x[[i, k]] - mean[k]) / scale[k]).collect())
        .collect();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut gw = vec![0.0; dim];
    for _ in 0..cfg.iterations {
        gw.iter_mut().for_each(|g| *g = 0.0);
        let mut gb = 0.0;
        for (r, &i) in std_rows.iter().zip(rows) {
            let z = b + r.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let err = 1.0 / (1.0 + (-z).exp()) - f64::from(y[i]);
            for k in 0..dim {
                gw[k] += err * r[k];
            }
            gb += err;
        }
        for k in 0..dim {
            w[k] -= cfg.learning_rate * gw[k] / m;
        }
        b -= cfg.learning_rate * gb / m;
    }
    LogisticProbe {
        mean,
        scale,
        weights: w,
        bias: b,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// `None` for bins without test nodes.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub overall_accuracy: f64,
    /// Share of the most common sensitive value on the test mask.
    pub base_rate: f64,
    pub bins: Vec<ProbeBin>,
}

impl ProbeReport {
    /// Mean accuracy over the non-empty bins whose lower edge is below `upper`.
    pub fn mean_accuracy_below(&self, upper: f64) -> Option<f64> {
        let accs: Vec<f64> = self
            .bins
            .iter()
            .filter(|b| b.lower < upper - 1e-12)
            .filter_map(|b| b.accuracy)
            .collect();
        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
    }
}

/// Trains the probe on `split.train` and scores every test node, grouped
/// by its majority-neighbor ratio.
pub fn probe_sensitive_leakage(
    embeddings: ArrayView2<'_, f64>,
    g: &Graph,
    split: &SplitMasks,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if !g.is_binary() {
        return Err(Error::validation("the leakage probe needs a binary sensitive attribute"));
    }
    if embeddings.nrows() != g.num_nodes() {
        return Err(Error::validation("embedding rows must match the node count"));
    }
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::validation("probe needs non-empty train and test masks"));
    }
    let target: Vec<u8> = g.sensitive().iter().map(|&s| s as u8).collect();
    let probe = fit_logistic(embeddings, &target, &split.train, cfg);
    let ratios = majority_neighbor_ratios(g);

    let mut counts = [0usize; RATIO_BINS];
    let mut correct = [0usize; RATIO_BINS];
    let mut ones = 0;
    for &i in &split.test {
        let b = ratio_bin(ratios[i]);
        counts[b] += 1;
        correct[b] += usize::from(probe.predict(embeddings.row(i)) == target[i]);
        ones += usize::from(target[i] == 1);
    }
    let n = split.test.len();
    let width = 1.0 / RATIO_BINS as f64;
    let bins = (0..RATIO_BINS)
        .map(|b| ProbeBin {
            lower: b as f64 * width,
            upper: (b + 1) as f64 * width,
            count: counts[b],
            accuracy: (counts[b] > 0).then(|| correct[b] as f64 / counts[b] as f64),
        })
        .collect();
    Ok(ProbeReport {
        overall_accuracy: correct.iter().sum::<usize>() as f64 / n as f64,
        base_rate: ones.max(n - ones) as f64 / n as f64,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_gilbert, make_splits, SplitFractions};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn one_hot_sensitive_is_perfectly_probed() {
        let g = generate_gilbert(400, 0.02, &[0.6, 0.4], 1).unwrap();
        let mut e = Array2::zeros((400, 2));
        for i in 0..400 {
            e[[i, g.group(i)]] = 1.0;
        }
        let split = make_splits(&g, SplitFractions::default(), 1).unwrap();
        let r = probe_sensitive_leakage(e.view(), &g, &split, &ProbeConfig::default()).unwrap();
        assert_eq!(r.overall_accuracy, 1.0);
        assert_eq!(r.bins.len(), 10);
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), split.test.len());
    }

    #[test]
    fn noise_embeddings_sit_at_base_rate() {
        let g = generate_gilbert(2000, 0.005, &[0.7, 0.3], 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let e = Array2::from_shape_simple_fn((2000, 8), || StandardNormal.sample(&mut rng));
        let split = make_splits(&g, SplitFractions::default(), 2).unwrap();
        let r = probe_sensitive_leakage(e.view(), &g, &split, &ProbeConfig::default()).unwrap();
        let n = split.test.len() as f64;
        let sigma = (r.base_rate * (1.0 - r.base_rate) / n).sqrt();
        assert!((r.overall_accuracy - r.base_rate).abs() <= 3.0 * sigma, "{r:?}");
    }

    #[test]
    fn empty_bins_are_absent_not_zero() {
        // edgeless graph: every ratio is 0, so only bin 0 is populated
        let g = generate_gilbert(100, 0.0, &[0.5, 0.5], 4).unwrap();
        let split = make_splits(&g, SplitFractions::default(), 4).unwrap();
        let e = Array2::zeros((100, 3));
        let r = probe_sensitive_leakage(e.view(), &g, &split, &ProbeConfig::default()).unwrap();
        assert!(r.bins[0].accuracy.is_some());
        assert!(r.bins[1..].iter().all(|b| b.count == 0 && b.accuracy.is_none()));
        assert_eq!(r.mean_accuracy_below(0.3), r.bins[0].accuracy);
    }
}
