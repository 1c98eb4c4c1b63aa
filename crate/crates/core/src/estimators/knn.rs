//! Leave-one-out k-nearest-neighbor error and its asymptotic lower bound.
//!
//! Distances are squared Euclidean. Before ranking, rows are put in a
//! canonical order (lexicographic on coordinates, then label) and equal
//! distances are broken by that canonical index, so the output does not depend
//! on the order in which samples are presented.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{invalid, Error, Result};
use crate::math::sq_dist;

/// Odd k from 1 to 199.
pub fn default_k_range() -> Vec<usize> {
    (1..=199).step_by(2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnEstimate {
    /// Smallest LOO error over the k range.
    pub upper: f64,
    pub lower: f64,
    pub mid: f64,
    /// The k that attained `upper`.
    pub k0: usize,
}

/// Canonical row order: lexicographic on coordinates, then label.
fn canonical_order(data: &LabeledDataset) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (data.row(i), data.row(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(data.label(i).cmp(&data.label(j)))
    });
    idx
}

/// LOO error counts for every k in `ks` (all odd, all `< n`), sharing one
/// neighbor ranking per point.
fn loo_error_counts(data: &LabeledDataset, ks: &[usize]) -> Vec<usize> {
    let canon = data.permuted(&canonical_order(data));
    let n = canon.len();
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let mut errors = vec![0usize; ks.len()];
    let mut neighbors: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut b_count = vec![0usize; k_max + 1];

    for i in 0..n {
        let xi = canon.row(i);
        neighbors.clear();
        neighbors.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(xi, canon.row(j)), j)),
        );
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k_max < neighbors.len() {
            neighbors.select_nth_unstable_by(k_max - 1, by_rank);
            neighbors.truncate(k_max);
        }
        neighbors.sort_unstable_by(by_rank);

        let mut acc = 0;
        for (r, &(_, j)) in neighbors.iter().enumerate() {
            if canon.label(j) == Label::B {
                acc += 1;
            }
            b_count[r + 1] = acc;
        }
        let truth = canon.label(i);
        for (slot, &k) in errors.iter_mut().zip(ks) {
            let predicted = if 2 * b_count[k] > k { Label::B } else { Label::A };
            if predicted != truth {
                *slot += 1;
            }
        }
    }
    errors
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return invalid(format!("k must be odd and positive, got {k}"));
    }
    if k >= n {
        return Err(Error::InsufficientData(format!("k = {k} needs more than {n} points")));
    }
    Ok(())
}

/// Fraction of points misclassified by majority vote of their `k` nearest
/// other points.
pub fn knn_loo_error(data: &LabeledDataset, k: usize) -> Result<f64> {
    check_k(k, data.len())?;
    let errs = loo_error_counts(data, &[k]);
    Ok(errs[0] as f64 / data.len() as f64)
}

/// Asymptotic lower bound paired with a kNN-LOO error.
pub fn knn_lower_bound(upper: f64, k: usize) -> f64 {
    match k {
        0 => upper,
        1 => (1.0 - (1.0 - 2.0 * upper).max(0.0).sqrt()) / 2.0,
        2 => upper / 2.0,
        _ => upper / (1.0 + (1.0 / k as f64).sqrt()),
    }
}

/// Minimum kNN-LOO error over `k_range` with its lower bound and midpoint.
///
/// Values of k that are not below `n` are dropped; among equal errors the
/// smallest k wins.
pub fn knn_estimate(data: &LabeledDataset, k_range: &[usize]) -> Result<KnnEstimate> {
    let n = data.len();
    let mut ks: Vec<usize> = k_range.iter().copied().filter(|&k| k < n).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no k in the configured range is below n = {n}"
        )));
    }
    for &k in &ks {
        check_k(k, n)?;
    }
    let errs = loo_error_counts(data, &ks);
    let (best, _) = errs
        .iter()
        .enumerate()
        .min_by_key(|&(pos, &e)| (e, pos))
        .expect("nonempty");
    let k0 = ks[best];
    let upper = errs[best] as f64 / n as f64;
    let lower = knn_lower_bound(upper, k0);
    Ok(KnnEstimate {
        upper,
        lower,
        mid: 0.5 * (upper + lower),
        k0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: &[f64], b: &[f64]) -> LabeledDataset {
        let ca: Vec<Vec<f64>> = a.iter().map(|&v| vec![v]).collect();
        let cb: Vec<Vec<f64>> = b.iter().map(|&v| vec![v]).collect();
        LabeledDataset::from_classes(1, &ca, &cb).unwrap()
    }

    #[test]
    fn singleton_classes_always_wrong() {
        let ds = line(&[0.0], &[100.0]);
        assert_eq!(knn_loo_error(&ds, 1).unwrap(), 1.0);
    }

    #[test]
    fn separated_clusters_are_perfect() {
        let a: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let b: Vec<f64> = (0..10).map(|i| 50.0 + i as f64 * 0.1).collect();
        let ds = line(&a, &b);
        assert_eq!(knn_loo_error(&ds, 1).unwrap(), 0.0);
        let est = knn_estimate(&ds, &default_k_range()).unwrap();
        assert_eq!((est.upper, est.lower, est.mid), (0.0, 0.0, 0.0));
        assert_eq!(est.k0, 1);
    }

    #[test]
    fn rejects_bad_k() {
        let ds = line(&[0.0, 1.0], &[2.0, 3.0]);
        assert!(knn_loo_error(&ds, 2).is_err());
        assert!(knn_loo_error(&ds, 0).is_err());
        assert!(knn_loo_error(&ds, 5).is_err());
        assert!(knn_estimate(&ds, &[7, 9]).is_err());
    }

    #[test]
    fn lower_bound_cases() {
        assert_eq!(knn_lower_bound(0.0, 1), 0.0);
        assert_eq!(knn_lower_bound(0.5, 1), 0.5);
        assert!((knn_lower_bound(0.3, 4) - 0.2).abs() < 1e-15);
        assert_eq!(knn_lower_bound(0.3, 2), 0.15);
        // radicand clamps
        assert_eq!(knn_lower_bound(0.7, 1), 0.5);
    }

    #[test]
    fn range_is_truncated_to_n() {
        let ds = line(&[0.0, 0.1, 0.2], &[1.0, 1.1, 1.2]);
        let est = knn_estimate(&ds, &[1, 3, 5, 7, 199]).unwrap();
        assert!(est.k0 <= 5);
    }

    #[test]
    fn duplicate_points_do_not_raise_one_nn_error() {
        let base = line(&[0.0, 0.4, 0.9, 1.5], &[0.3, 1.0, 1.2, 2.0]);
        let before = knn_loo_error(&base, 1).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..base.len() {
            let v = base.row(i).to_vec();
            let target = if base.label(i) == Label::A { &mut a } else { &mut b };
            target.push(v.clone());
            target.push(v);
        }
        let doubled = LabeledDataset::from_classes(1, &a, &b).unwrap();
        assert!(knn_loo_error(&doubled, 1).unwrap() <= before);
    }
}
