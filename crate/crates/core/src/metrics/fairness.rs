use ndarray::ArrayView2;

use crate::error::{Error, Result};

fn binary_group(sensitive: &[usize], i: usize) -> Result<usize> {
    match sensitive[i] {
        s @ (0 | 1) => Ok(s),
        s => Err(Error::validation(format!("node {i}: sensitive value {s} is not binary"))),
    }
}

/// `|P(ŷ=1 | s=1) − P(ŷ=1 | s=0)|` over the nodes in `mask`.
pub fn delta_sp(pred: &[u8], sensitive: &[usize], mask: &[usize]) -> Result<f64> {
    let mut total = [0usize; 2];
    let mut positive = [0usize; 2];
    for &i in mask {
        let s = binary_group(sensitive, i)?;
        total[s] += 1;
        positive[s] += usize::from(pred[i] == 1);
    }
    if total.contains(&0) {
        return Err(Error::undefined("statistical parity needs both groups in the mask"));
    }
    let rate = |s: usize| positive[s] as f64 / total[s] as f64;
    Ok((rate(1) - rate(0)).abs())
}

/// `|P(ŷ=1 | y=1, s=1) − P(ŷ=1 | y=1, s=0)|` over the nodes in `mask`.
pub fn delta_eo(pred: &[u8], labels: &[u8], sensitive: &[usize], mask: &[usize]) -> Result<f64> {
    let mut positives = [0usize; 2];
    let mut hits = [0usize; 2];
    for &i in mask {
        let s = binary_group(sensitive, i)?;
        if labels[i] == 1 {
            positives[s] += 1;
            hits[s] += usize::from(pred[i] == 1);
        }
    }
    if positives.contains(&0) {
        return Err(Error::undefined("equal opportunity needs a positive node in each group"));
    }
    let tpr = |s: usize| hits[s] as f64 / positives[s] as f64;
    Ok((tpr(1) - tpr(0)).abs())
}

/// Area under the ROC curve as the normalised Mann–Whitney U statistic:
/// the probability a random positive scores above a random negative, ties
/// counting one half.
pub fn auc(scores: &[f64], labels: &[u8], mask: &[usize]) -> Result<f64> {
    let mut pts: Vec<(f64, bool)> = mask.iter().map(|&i| (scores[i], labels[i] == 1)).collect();
    let n_pos = pts.iter().filter(|p| p.1).count();
    let n_neg = pts.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::undefined("AUC needs both classes in the mask"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sum of (1-based, tie-averaged) ranks of the positives
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < pts.len() {
        let mut end = start + 1;
        while end < pts.len() && pts[end].0 == pts[start].0 {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        rank_sum += avg_rank * pts[start..end].iter().filter(|p| p.1).count() as f64;
        start = end;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Reciprocal of the mean squared distance from each row to the centroid
/// of its group, computed over `mask`. Returns `+∞` (with a warning) when
/// every row sits exactly on its group centroid.
pub fn distance_based_bias(embeddings: ArrayView2<'_, f64>, sensitive: &[usize], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::undefined("distance-based bias of an empty node set"));
    }
    let groups = mask.iter().map(|&i| sensitive[i]).max().unwrap_or(0) + 1;
    let dim = embeddings.ncols();
    let mut centroids = vec![vec![0.0; dim]; groups];
    let mut counts = vec![0usize; groups];
    for &i in mask {
        let s = sensitive[i];
        counts[s] += 1;
        for (c, v) in centroids[s].iter_mut().zip(embeddings.row(i)) {
            *c += v;
        }
    }
    for (c, &k) in centroids.iter_mut().zip(&counts) {
        if k > 0 {
            c.iter_mut().for_each(|v| *v /= k as f64);
        }
    }
    let total: f64 = mask
        .iter()
        .map(|&i| {
            embeddings
                .row(i)
                .iter()
                .zip(&centroids[sensitive[i]])
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum();
    let mean = total / mask.len() as f64;
    if mean == 0.0 {
        log::warn!("distance-based bias: all rows coincide with their group centroid");
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / mean)
}

/// `(1 − method/vanilla) × 100`, in percent.
pub fn relative_reduction(delta_method: f64, delta_vanilla: f64) -> Result<f64> {
    if delta_vanilla == 0.0 || !delta_vanilla.is_finite() {
        return Err(Error::undefined("relative reduction against a zero baseline"));
    }
    Ok((1.0 - delta_method / delta_vanilla) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn sp_example() {
        // group 1: 3 of 5 accepted, group 0: 2 of 5 accepted
        let s = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
        let pred = [1, 1, 1, 0, 0, 1, 1, 0, 0, 0];
        let mask: Vec<usize> = (0..10).collect();
        assert!((delta_sp(&pred, &s, &mask).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(delta_sp(&[1; 10], &s, &mask).unwrap(), 0.0);
        assert!(matches!(delta_sp(&pred, &s, &[0, 1]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn eo_example() {
        // 10 positives per group, TPR 0.9 vs 0.7
        let mut s = vec![1; 10];
        s.extend(vec![0; 10]);
        let labels = vec![1u8; 20];
        let mut pred = vec![1u8; 20];
        pred[0] = 0;
        for p in &mut pred[10..13] {
            *p = 0;
        }
        let mask: Vec<usize> = (0..20).collect();
        assert!((delta_eo(&pred, &labels, &s, &mask).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(delta_eo(&labels, &labels, &s, &mask).unwrap(), 0.0);
        assert!(delta_eo(&pred, &[0; 20], &s, &mask).is_err());
    }

    #[test]
    fn auc_examples() {
        let labels = [0u8, 1, 1, 0, 1];
        let mask = [0, 1, 2, 3, 4];
        let as_scores: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        assert_eq!(auc(&as_scores, &labels, &mask).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 5], &labels, &mask).unwrap(), 0.5);
        assert!(auc(&[0.3; 5], &[1; 5], &mask).is_err());
    }

    #[test]
    fn distance_bias_examples() {
        // n = 4 nodes: all on centroid except one pair symmetric around it
        let e = array![[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [5.0, 5.0]];
        let s = [0, 0, 0, 1];
        let mask = [0, 1, 2, 3];
        // group 0 centroid at origin; squared distances 0, 1, 1; group 1 is exact
        assert!((distance_based_bias(e.view(), &s, &mask).unwrap() - 4.0 / 2.0).abs() < 1e-15);
        let doubled = &e * 2.0;
        assert!((distance_based_bias(doubled.view(), &s, &mask).unwrap() - 0.5).abs() < 1e-15);
        let flat = Array2::<f64>::ones((3, 2));
        assert_eq!(distance_based_bias(flat.view(), &[0, 1, 0], &[0, 1, 2]).unwrap(), f64::INFINITY);
        assert!(distance_based_bias(flat.view(), &[0, 1, 0], &[]).is_err());
    }

    #[test]
    fn relative_reduction_examples() {
        // Pokec-z BeMap (row) ΔEO 1.55 vs vanilla GCN 7.81; the published
        // 80.0 was computed from unrounded table entries
        let r = relative_reduction(0.0155, 0.0781).unwrap();
        assert!((r - 80.0).abs() < 0.2, "{r}");
        assert_eq!(relative_reduction(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(relative_reduction(0.0, 0.3).unwrap(), 100.0);
        assert!(relative_reduction(0.1, 0.2).unwrap() > 0.0);
        assert!(relative_reduction(0.4, 0.2).unwrap() < 0.0);
        assert!(relative_reduction(0.1, 0.0).is_err());
    }
}
