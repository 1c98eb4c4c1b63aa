//! Gaussian naive Bayes training error.

use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::math::LN_2PI;

const VAR_FLOOR: f64 = 1e-9;

struct ClassModel {
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
    log_norm: f64,
}

impl ClassModel {
    fn fit(data: &LabeledDataset, label: Label) -> Result<Self> {
        let d = data.dim();
        let x = data.class_features(label);
        let m = x.len() / d;
        if m < 2 {
            return Err(Error::InsufficientData(format!(
                "naive Bayes needs 2 points in class {label:?}, got {m}"
            )));
        }
        let mut mean = vec![0.0; d];
        for row in x.chunks_exact(d) {
            for (s, v) in mean.iter_mut().zip(row) {
                *s += v;
            }
        }
        mean.iter_mut().for_each(|s| *s /= m as f64);
        let mut var = vec![0.0; d];
        for row in x.chunks_exact(d) {
            for l in 0..d {
                let z = row[l] - mean[l];
                var[l] += z * z;
            }
        }
        for v in &mut var {
            *v = (*v / m as f64).max(VAR_FLOOR);
        }
        let log_norm = -0.5 * var.iter().map(|v| LN_2PI + v.ln()).sum::<f64>();
        if !log_norm.is_finite() {
            return Err(Error::Degenerate("non-finite feature variance".into()));
        }
        Ok(ClassModel {
            log_prior: (m as f64 / data.len() as f64).ln(),
            mean,
            var,
            log_norm,
        })
    }

    fn log_joint(&self, x: &[f64]) -> f64 {
        let mut q = 0.0;
        for l in 0..x.len() {
            let z = x[l] - self.mean[l];
            q += z * z / self.var[l];
        }
        self.log_prior + self.log_norm - 0.5 * q
    }
}

/// Training misclassification rate of a per-class, per-feature Gaussian
/// model; equal posteriors are assigned to class A.
pub fn naive_bayes_error(data: &LabeledDataset) -> Result<f64> {
    data.require_both_classes()?;
    let a = ClassModel::fit(data, Label::A)?;
    let b = ClassModel::fit(data, Label::B)?;
    let wrong = (0..data.len())
        .filter(|&i| {
            let x = data.row(i);
            let predicted = if a.log_joint(x) >= b.log_joint(x) { Label::A } else { Label::B };
            predicted != data.label(i)
        })
        .count();
    Ok(wrong as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_classes() {
        let ds = LabeledDataset::from_classes(1, &[vec![-1.0], vec![-1.1]], &[vec![1.0], vec![1.1]]).unwrap();
        assert_eq!(naive_bayes_error(&ds).unwrap(), 0.0);
    }

    #[test]
    fn identical_classes_tie_to_a() {
        let rows = vec![vec![0.0, 1.0], vec![0.5, -1.0], vec![2.0, 0.3]];
        let ds = LabeledDataset::from_classes(2, &rows, &rows).unwrap();
        assert_eq!(naive_bayes_error(&ds).unwrap(), 0.5);
    }

    #[test]
    fn needs_two_points_per_class() {
        let ds = LabeledDataset::from_classes(1, &[vec![0.0]], &[vec![1.0], vec![2.0]]).unwrap();
        assert!(naive_bayes_error(&ds).is_err());
    }

    #[test]
    fn constant_feature_is_floored() {
        let ds = LabeledDataset::from_classes(
            2,
            &[vec![0.0, 1.0], vec![0.0, 2.0]],
            &[vec![0.0, 5.0], vec![0.0, 6.0]],
        )
        .unwrap();
        assert_eq!(naive_bayes_error(&ds).unwrap(), 0.0);
    }
}
