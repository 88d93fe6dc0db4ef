//! Monte-Carlo checks of the bias-residual results.
//!
//! Residuals are drawn per group as `μ_s + N(0, I)` with group means
//! `±sep/2` on the first coordinate. Each check returns raw statistics plus
//! a [`TheoryCheck`] record carrying the predicted value, the empirical
//! value, the tolerance and the verdict.

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{self, tag, StreamRng};

const LEMMA1: u64 = 1;
const THEOREM1: u64 = 2;
const LEMMA3: u64 = 3;
const LEMMA3_SKEWED: u64 = 4;

/// Largest accepted condition number for the Lemma 1 construction.
const MAX_CONDITION: f64 = 1e6;
const MAX_RETRIES: usize = 1000;

/// One row of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryCheck {
    pub claim: String,
    pub predicted: f64,
    pub empirical: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

fn insufficient(trials: usize) -> Option<String> {
    (trials < 2).then(|| format!("insufficient samples: {trials} trial(s), standard errors are unreliable"))
}

/// Per-group spherical Gaussian residuals.
#[derive(Clone, Debug)]
pub struct ResidualEnsemble {
    pub residuals: DMatrix<f64>,
    pub groups: Vec<usize>,
    pub group_means: Vec<Vec<f64>>,
    pub fair_mean: Vec<f64>,
}

impl ResidualEnsemble {
    pub fn sample<R: Rng + ?Sized>(groups: Vec<usize>, group_means: Vec<Vec<f64>>, rng: &mut R) -> Self {
        let dim = group_means[0].len();
        let n = groups.len();
        let mut counts = vec![0usize; group_means.len()];
        for &s in &groups {
            counts[s] += 1;
        }
        let mut fair_mean = vec![0.0; dim];
        for (mu, &c) in group_means.iter().zip(&counts) {
            for (f, m) in fair_mean.iter_mut().zip(mu) {
                *f += m * c as f64 / n as f64;
            }
        }
        let residuals = DMatrix::from_fn(n, dim, |i, k| {
            let z: f64 = StandardNormal.sample(rng);
            group_means[groups[i]][k] + z
        });
        ResidualEnsemble {
            residuals,
            groups,
            group_means,
            fair_mean,
        }
    }
}

/// Means `(+sep/2, 0, …)` and `(−sep/2, 0, …)`.
pub fn binary_means(dim: usize, separation: f64) -> Vec<Vec<f64>> {
    let mut mu0 = vec![0.0; dim];
    let mut mu1 = vec![0.0; dim];
    mu0[0] = separation / 2.0;
    mu1[0] = -separation / 2.0;
    vec![mu0, mu1]
}

fn sq_dist(row: impl Iterator<Item = f64>, centre: &[f64]) -> f64 {
    row.zip(centre).map(|(a, b)| (a - b) * (a - b)).sum()
}

// ---------------------------------------------------------------------------
// Lemma 1

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Outcome {
    /// Max elementwise gap between the layer-wise forward pass and
    /// `(t + b) W⁽¹⁾…W⁽ˡ⁻¹⁾`, over all layers and instances.
    pub decomposition_error: f64,
    /// Max elementwise gap between the network output and `Z`.
    pub output_error: f64,
}

impl Lemma1Outcome {
    pub fn max_error(&self) -> f64 {
        self.decomposition_error.max(self.output_error)
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Row-normalised random adjacency with self-loops whose `L`-th power is
/// well conditioned, plus invertible square weights.
fn lemma1_instance<R: Rng + ?Sized>(n: usize, d: usize, layers: usize, rng: &mut R) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    for _ in 0..MAX_RETRIES {
        let mut a = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.5 {
                    a[(i, j)] = 1.0;
                    a[(j, i)] = 1.0;
                }
            }
        }
        for i in 0..n {
            let deg: f64 = a.row(i).sum();
            a.row_mut(i).scale_mut(1.0 / deg);
        }
        let a_l = a.pow(layers as u32);
        if condition_number(&a_l) > MAX_CONDITION {
            continue;
        }
        let ws: Vec<DMatrix<f64>> = (0..layers).map(|_| gaussian_matrix(d, d, rng)).collect();
        if ws.iter().any(|w| condition_number(w) > MAX_CONDITION) {
            continue;
        }
        return Ok((a, ws));
    }
    Err(Error::validation("could not construct a well-conditioned instance"))
}

/// Checks the layer-wise decomposition on one random linear GCN of depth
/// `layers`. `zero_residual` forces `Z_b = 0`.
pub fn verify_lemma1_instance(n: usize, d: usize, layers: usize, zero_residual: bool, seed: u64, index: u64) -> Result<Lemma1Outcome> {
    if n == 0 || d == 0 || layers == 0 {
        return Err(Error::validation("lemma 1 needs n, d and L all positive"));
    }
    let mut rng = rng::stream(seed, &[tag::THEORY, LEMMA1, index]);
    let (a, ws) = lemma1_instance(n, d, layers, &mut rng)?;
    let z_t = gaussian_matrix(n, d, &mut rng);
    let z_b = if zero_residual {
        DMatrix::zeros(n, d)
    } else {
        gaussian_matrix(n, d, &mut rng)
    };

    let a_l_inv = a
        .pow(layers as u32)
        .try_inverse()
        .ok_or_else(|| Error::validation("adjacency power is singular"))?;
    let w_total = ws.iter().skip(1).fold(ws[0].clone(), |acc, w| acc * w);
    let w_inv = w_total
        .try_inverse()
        .ok_or_else(|| Error::validation("weight product is singular"))?;
    let t1 = &a_l_inv * &z_t * &w_inv;
    let b1 = &a_l_inv * &z_b * &w_inv;

    // Linear GCN: H⁽ˡ⁺¹⁾ = Ã H⁽ˡ⁾ W⁽ˡ⁾, starting from H⁽¹⁾ = T⁽¹⁾ + B⁽¹⁾.
    let mut h = &t1 + &b1;
    let mut a_pow = DMatrix::<f64>::identity(n, n);
    let mut w_chain = DMatrix::<f64>::identity(d, d);
    let mut decomposition_error: f64 = 0.0;
    for l in 1..=layers {
        if l > 1 {
            h = &a * &h * &ws[l - 2];
            a_pow = &a * &a_pow;
            w_chain = &w_chain * &ws[l - 2];
        }
        let t = &a_pow * &t1;
        let b = &a_pow * &b1;
        if zero_residual && b.iter().any(|&v| v != 0.0) {
            return Err(Error::validation("zero residual produced a non-zero bias term"));
        }
        let rebuilt = if l == 1 { &t + &b } else { (&t + &b) * &w_chain };
        decomposition_error = decomposition_error.max(max_abs_diff(&h, &rebuilt));
    }
    let output = &a * &h * &ws[layers - 1];
    let output_error = max_abs_diff(&output, &(&z_t + &z_b));
    Ok(Lemma1Outcome {
        decomposition_error,
        output_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    pub nodes: usize,
    pub dim: usize,
    pub layers: usize,
    pub instances: usize,
    pub tolerance: f64,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            nodes: 10,
            dim: 10,
            layers: 2,
            instances: 20,
            tolerance: 1e-8,
        }
    }
}

/// Worst case over `cfg.instances` random instances.
pub fn verify_lemma1(cfg: &Lemma1Config, seed: u64, exec: Exec) -> Result<(Lemma1Outcome, TheoryCheck)> {
    if cfg.instances == 0 {
        return Err(Error::validation("lemma 1 needs at least one instance"));
    }
    let runs = exec.map(cfg.instances, |k| verify_lemma1_instance(cfg.nodes, cfg.dim, cfg.layers, false, seed, k as u64));
    let mut worst = Lemma1Outcome {
        decomposition_error: 0.0,
        output_error: 0.0,
    };
    for r in runs {
        let r = r?;
        worst.decomposition_error = worst.decomposition_error.max(r.decomposition_error);
        worst.output_error = worst.output_error.max(r.output_error);
    }
    let check = TheoryCheck {
        claim: "lemma1".into(),
        predicted: 0.0,
        empirical: worst.max_error(),
        tolerance: cfg.tolerance,
        passed: worst.max_error() <= cfg.tolerance,
        warning: None,
    };
    Ok((worst, check))
}

// ---------------------------------------------------------------------------
// Theorem 1

/// Sums collected from one message-passing step on one graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepSums {
    pub pre: f64,
    pub post: f64,
    pub inv_degree: f64,
    pub nodes: usize,
    /// Per group: (count, Σ b, Σ b′).
    pub group_sums: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

impl StepSums {
    fn merge(&mut self, other: &StepSums) {
        self.pre += other.pre;
        self.post += other.post;
        self.inv_degree += other.inv_degree;
        self.nodes += other.nodes;
        if self.group_sums.is_empty() {
            self.group_sums = other.group_sums.clone();
            return;
        }
        for (a, b) in self.group_sums.iter_mut().zip(&other.group_sums) {
            a.0 += b.0;
            a.1.iter_mut().zip(&b.1).for_each(|(x, y)| *x += y);
            a.2.iter_mut().zip(&b.2).for_each(|(x, y)| *x += y);
        }
    }
}

/// Applies `b′ᵢ = (1/dᵢ) Σ_{j∈N(i)} bⱼ` on adjacency lists and accumulates
/// squared distances to the true group means.
pub fn message_passing_step(adj: &[Vec<usize>], ens: &ResidualEnsemble) -> Result<StepSums> {
    let dim = ens.residuals.ncols();
    let mut sums = StepSums {
        group_sums: vec![(0, vec![0.0; dim], vec![0.0; dim]); ens.group_means.len()],
        ..StepSums::default()
    };
    let mut post = vec![0.0; dim];
    for (i, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            return Err(Error::validation(format!("node {i} is isolated")));
        }
        post.iter_mut().for_each(|v| *v = 0.0);
        for &j in nbrs {
            for (k, v) in post.iter_mut().enumerate() {
                *v += ens.residuals[(j, k)];
            }
        }
        let inv = 1.0 / nbrs.len() as f64;
        post.iter_mut().for_each(|v| *v *= inv);
        let s = ens.groups[i];
        let mu = &ens.group_means[s];
        sums.pre += sq_dist(ens.residuals.row(i).iter().copied(), mu);
        sums.post += sq_dist(post.iter().copied(), mu);
        sums.inv_degree += inv;
        sums.nodes += 1;
        let g = &mut sums.group_sums[s];
        g.0 += 1;
        for k in 0..dim {
            g.1[k] += ens.residuals[(i, k)];
            g.2[k] += post[k];
        }
    }
    Ok(sums)
}

/// Gilbert graph on each half of the nodes separately, resampled until no
/// node is isolated.
fn within_group_gilbert<R: Rng + ?Sized>(groups: &[usize], p: f64, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    let n = groups.len();
    for _ in 0..MAX_RETRIES {
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if groups[i] == groups[j] && rng.random::<f64>() < p {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        if adj.iter().all(|a| !a.is_empty()) {
            return Ok(adj);
        }
    }
    Err(Error::validation(format!(
        "no isolated-node-free graph after {MAX_RETRIES} draws (n = {n}, p = {p})"
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Config {
    pub nodes: usize,
    pub p: f64,
    pub dim: usize,
    pub separation: f64,
    pub trials: usize,
    /// Relative tolerance on |empirical − predicted| / predicted.
    pub tolerance: f64,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Theorem1Config {
            nodes: 200,
            p: 0.05,
            dim: 8,
            separation: 2.0,
            trials: 1000,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Outcome {
    pub empirical_ratio: f64,
    /// Empirical `E[1/dᵢ]` over all nodes and trials.
    pub predicted_ratio: f64,
    /// Largest distance between a group's mean residual before and after
    /// the step, pooled over trials.
    pub centroid_shift: f64,
}

/// Edges are drawn within groups only, so every neighbor of a node shares
/// its residual mean and the group centroids stay put.
pub fn verify_theorem1(cfg: &Theorem1Config, seed: u64, exec: Exec) -> Result<(Theorem1Outcome, TheoryCheck)> {
    if cfg.nodes < 4 || cfg.dim == 0 || cfg.trials == 0 {
        return Err(Error::validation("theorem 1 needs nodes >= 4, dim >= 1 and trials >= 1"));
    }
    if !(cfg.p > 0.0 && cfg.p <= 1.0) {
        return Err(Error::validation(format!("edge probability {} outside (0, 1]", cfg.p)));
    }
    let groups: Vec<usize> = (0..cfg.nodes).map(|i| usize::from(i >= cfg.nodes / 2)).collect();
    let means = binary_means(cfg.dim, cfg.separation);
    let runs = exec.map(cfg.trials, |t| -> Result<StepSums> {
        let mut rng = rng::stream(seed, &[tag::THEORY, THEOREM1, t as u64]);
        let adj = within_group_gilbert(&groups, cfg.p, &mut rng)?;
        let ens = ResidualEnsemble::sample(groups.clone(), means.clone(), &mut rng);
        message_passing_step(&adj, &ens)
    });
    let mut total = StepSums::default();
    for r in runs {
        total.merge(&r?);
    }
    let outcome = theorem1_outcome(&total);
    let rel = (outcome.empirical_ratio - outcome.predicted_ratio).abs() / outcome.predicted_ratio;
    let check = TheoryCheck {
        claim: "theorem1".into(),
        predicted: outcome.predicted_ratio,
        empirical: outcome.empirical_ratio,
        tolerance: cfg.tolerance,
        passed: rel <= cfg.tolerance,
        warning: insufficient(cfg.trials),
    };
    Ok((outcome, check))
}

fn theorem1_outcome(total: &StepSums) -> Theorem1Outcome {
    let centroid_shift = total
        .group_sums
        .iter()
        .filter(|g| g.0 > 0)
        .map(|(c, pre, post)| {
            let c = *c as f64;
            pre.iter().zip(post).map(|(a, b)| ((a - b) / c).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    Theorem1Outcome {
        empirical_ratio: total.post / total.pre,
        predicted_ratio: total.inv_degree / total.nodes as f64,
        centroid_shift,
    }
}

// ---------------------------------------------------------------------------
// Lemma 3 / Theorem 2

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma3Config {
    pub nodes: usize,
    pub trials: usize,
    /// Size of every self-augmented neighborhood, self included.
    pub neighborhood_size: usize,
    pub dim: usize,
    pub separation: f64,
    /// Number of standard errors allowed for the centroid checks.
    pub sigmas: f64,
}

impl Default for Lemma3Config {
    fn default() -> Self {
        Lemma3Config {
            nodes: 5000,
            trials: 20,
            neighborhood_size: 4,
            dim: 8,
            separation: 2.0,
            sigmas: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma3Outcome {
    /// Largest distance from a group's post-step centroid to μ̄.
    pub centroid_gap: f64,
    /// Distance between the two post-step group centroids.
    pub centroid_separation: f64,
    /// Allowed gap: `sigmas · SE · √dim`.
    pub gap_tolerance: f64,
    pub shrinkage_ratio: f64,
    pub shrinkage_se: f64,
}

struct NeighborhoodTrial {
    /// Per group, post-step centroid.
    centroids: [Vec<f64>; 2],
    pre: f64,
    post: f64,
    /// Within-trial naive standard error of each centroid coordinate.
    naive_se: f64,
}

/// One trial: every node aggregates itself, `own − 1` other nodes of its
/// group and `other` nodes of the other group, each with weight 1/size.
fn neighborhood_trial(cfg: &Lemma3Config, own: usize, other: usize, rng: &mut StreamRng) -> NeighborhoodTrial {
    let n = cfg.nodes;
    let half = n / 2;
    let groups: Vec<usize> = (0..n).map(|i| usize::from(i >= half)).collect();
    let means = binary_means(cfg.dim, cfg.separation);
    let ens = ResidualEnsemble::sample(groups, means.clone(), rng);
    let fair: Vec<f64> = (0..cfg.dim).map(|k| (means[0][k] + means[1][k]) / 2.0).collect();
    let size = (own + other) as f64;
    let ranges = [0..half, half..n];

    let mut centroids = [vec![0.0; cfg.dim], vec![0.0; cfg.dim]];
    let mut sq = [vec![0.0; cfg.dim], vec![0.0; cfg.dim]];
    let (mut pre, mut post) = (0.0, 0.0);
    let mut row = vec![0.0; cfg.dim];
    for i in 0..n {
        let s = usize::from(i >= half);
        row.iter_mut().enumerate().for_each(|(k, v)| *v = ens.residuals[(i, k)]);
        let own_range = &ranges[s];
        // Draw own − 1 distinct same-group peers other than i.
        let peers = sample_indices(rng, own_range.len() - 1, own - 1);
        for p in peers.iter() {
            let mut j = own_range.start + p;
            if j >= i {
                j += 1;
            }
            row.iter_mut().enumerate().for_each(|(k, v)| *v += ens.residuals[(j, k)]);
        }
        let other_range = &ranges[1 - s];
        for p in sample_indices(rng, other_range.len(), other).iter() {
            let j = other_range.start + p;
            row.iter_mut().enumerate().for_each(|(k, v)| *v += ens.residuals[(j, k)]);
        }
        row.iter_mut().for_each(|v| *v /= size);
        pre += sq_dist(ens.residuals.row(i).iter().copied(), &fair);
        post += sq_dist(row.iter().copied(), &fair);
        for k in 0..cfg.dim {
            centroids[s][k] += row[k];
            sq[s][k] += row[k] * row[k];
        }
    }
    let mut naive_var: f64 = 0.0;
    for s in 0..2 {
        let c = ranges[s].len() as f64;
        for k in 0..cfg.dim {
            let m = centroids[s][k] / c;
            naive_var = naive_var.max((sq[s][k] / c - m * m) / c);
            centroids[s][k] = m;
        }
    }
    NeighborhoodTrial {
        centroids,
        pre,
        post,
        naive_se: naive_var.sqrt(),
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn run_neighborhoods(cfg: &Lemma3Config, own: usize, other: usize, claim: u64, seed: u64, exec: Exec) -> Lemma3Outcome {
    let trials = exec.map(cfg.trials, |t| {
        let mut rng = rng::stream(seed, &[tag::THEORY, claim, t as u64]);
        neighborhood_trial(cfg, own, other, &mut rng)
    });
    let fair: Vec<f64> = {
        let m = binary_means(cfg.dim, cfg.separation);
        (0..cfg.dim).map(|k| (m[0][k] + m[1][k]) / 2.0).collect()
    };
    // Pool centroids across trials; the standard error of each pooled
    // coordinate comes from the spread between trials.
    let t = trials.len() as f64;
    let mut pooled = [vec![0.0; cfg.dim], vec![0.0; cfg.dim]];
    let mut se: f64 = 0.0;
    for s in 0..2 {
        for k in 0..cfg.dim {
            let xs: Vec<f64> = trials.iter().map(|tr| tr.centroids[s][k]).collect();
            let (m, sd) = mean_sd(&xs);
            pooled[s][k] = m;
            se = se.max(sd / t.sqrt());
        }
    }
    if trials.len() < 2 {
        se = trials[0].naive_se;
    }
    let gap = |c: &[f64]| sq_dist(c.iter().copied(), &fair).sqrt();
    let centroid_gap = gap(&pooled[0]).max(gap(&pooled[1]));
    let centroid_separation = sq_dist(pooled[0].iter().copied(), &pooled[1]).sqrt();

    let ratios: Vec<f64> = trials.iter().map(|tr| tr.post / tr.pre).collect();
    let pre: f64 = trials.iter().map(|tr| tr.pre).sum();
    let post: f64 = trials.iter().map(|tr| tr.post).sum();
    let (_, ratio_sd) = mean_sd(&ratios);
    Lemma3Outcome {
        centroid_gap,
        centroid_separation,
        gap_tolerance: cfg.sigmas * se * (cfg.dim as f64).sqrt(),
        shrinkage_ratio: post / pre,
        shrinkage_se: ratio_sd / t.sqrt(),
    }
}

fn validate_lemma3(cfg: &Lemma3Config) -> Result<()> {
    if cfg.neighborhood_size < 4 {
        return Err(Error::validation(format!(
            "neighborhood size {} is below 4",
            cfg.neighborhood_size
        )));
    }
    if cfg.neighborhood_size % 2 != 0 {
        return Err(Error::validation("balanced neighborhoods need an even size"));
    }
    if cfg.trials == 0 || cfg.dim == 0 {
        return Err(Error::validation("lemma 3 needs trials >= 1 and dim >= 1"));
    }
    if cfg.nodes / 2 < cfg.neighborhood_size {
        return Err(Error::validation("each group must hold more nodes than a neighborhood"));
    }
    Ok(())
}

/// Balanced neighborhoods (half per group, self included). Returns the
/// outcome plus the centroid-consistency and shrinkage checks.
pub fn verify_lemma3_theorem2(cfg: &Lemma3Config, seed: u64, exec: Exec) -> Result<(Lemma3Outcome, Vec<TheoryCheck>)> {
    validate_lemma3(cfg)?;
    let half = cfg.neighborhood_size / 2;
    let out = run_neighborhoods(cfg, half, half, LEMMA3, seed, exec);
    let warning = insufficient(cfg.trials);
    let margin = cfg.sigmas * out.shrinkage_se;
    let checks = vec![
        TheoryCheck {
            claim: "lemma3".into(),
            predicted: 0.0,
            empirical: out.centroid_gap,
            tolerance: out.gap_tolerance,
            passed: out.centroid_gap <= out.gap_tolerance,
            warning: warning.clone(),
        },
        TheoryCheck {
            claim: "theorem2".into(),
            predicted: 1.0,
            empirical: out.shrinkage_ratio,
            tolerance: margin,
            passed: out.shrinkage_ratio + margin < 1.0,
            warning,
        },
    ];
    Ok((out, checks))
}

/// Control with a 3:1 own:other composition. The post-step centroids are
/// expected to separate by `‖μ₀ − μ₁‖ / 2`.
pub fn verify_skewed_control(cfg: &Lemma3Config, seed: u64, exec: Exec) -> Result<(Lemma3Outcome, TheoryCheck)> {
    validate_lemma3(cfg)?;
    if cfg.neighborhood_size % 4 != 0 {
        return Err(Error::validation("a 3:1 split needs a neighborhood size divisible by 4"));
    }
    let q = cfg.neighborhood_size / 4;
    let out = run_neighborhoods(cfg, 3 * q, q, LEMMA3_SKEWED, seed, exec);
    // Separation must exceed the noise on the difference of two centroids.
    let threshold = 2.0 * out.gap_tolerance;
    let check = TheoryCheck {
        claim: "lemma3_skewed_control".into(),
        predicted: cfg.separation / 2.0,
        empirical: out.centroid_separation,
        tolerance: threshold,
        passed: out.centroid_separation > threshold,
        warning: insufficient(cfg.trials),
    };
    Ok((out, check))
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    pub lemma1: Lemma1Config,
    pub theorem1: Theorem1Config,
    pub lemma3: Lemma3Config,
}

/// Runs every check in a fixed order.
pub fn run_all(cfg: &TheoryConfig, seed: u64, exec: Exec) -> Result<Vec<TheoryCheck>> {
    let mut out = vec![verify_lemma1(&cfg.lemma1, seed, exec)?.1];
    out.push(verify_theorem1(&cfg.theorem1, seed, exec)?.1);
    out.extend(verify_lemma3_theorem2(&cfg.lemma3, seed, exec)?.1);
    out.push(verify_skewed_control(&cfg.lemma3, seed, exec)?.1);
    Ok(out)
}
