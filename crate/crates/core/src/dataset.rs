//! Labeled two-class feature matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Class label of a binary problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn other(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Label::A => 0,
            Label::B => 1,
        }
    }
}

/// An `n × d` feature matrix (row-major) with one binary label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 {
            return invalid("dataset dimension must be positive");
        }
        if features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                got: features.len(),
            });
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return invalid(format!("non-finite feature value {v}"));
        }
        Ok(LabeledDataset {
            dim,
            features,
            labels,
        })
    }

    /// Stacks the rows of class A followed by the rows of class B.
    pub fn from_classes(dim: usize, class_a: &[Vec<f64>], class_b: &[Vec<f64>]) -> Result<Self> {
        let mut features = Vec::with_capacity(dim * (class_a.len() + class_b.len()));
        let mut labels = Vec::with_capacity(class_a.len() + class_b.len());
        for (rows, label) in [(class_a, Label::A), (class_b, Label::B)] {
            for row in rows {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: row.len(),
                    });
                }
                features.extend_from_slice(row);
                labels.push(label);
            }
        }
        Self::new(dim, features, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Number of rows carrying `label`.
    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Row-major features of one class, in dataset order.
    pub fn class_features(&self, label: Label) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count(label) * self.dim);
        for i in 0..self.len() {
            if self.labels[i] == label {
                out.extend_from_slice(self.row(i));
            }
        }
        out
    }

    /// Same rows and labels, with every coordinate transformed by `f`.
    pub fn map_features(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % self.dim, v))
            .collect();
        Self::new(self.dim, features, self.labels.clone())
    }

    /// Same points with labels A and B exchanged.
    pub fn swap_labels(&self) -> Self {
        LabeledDataset {
            dim: self.dim,
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| l.other()).collect(),
        }
    }

    /// Reorders the rows so row `i` of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len());
        let mut features = Vec::with_capacity(self.features.len());
        let mut labels = Vec::with_capacity(self.len());
        for &i in order {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            dim: self.dim,
            features,
            labels,
        }
    }

    pub(crate) fn require_both_classes(&self) -> Result<(usize, usize)> {
        let n_a = self.count(Label::A);
        let n_b = self.len() - n_a;
        if n_a == 0 || n_b == 0 {
            return Err(Error::InsufficientData(format!(
                "both classes must be present (n_A = {n_a}, n_B = {n_b})"
            )));
        }
        Ok((n_a, n_b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(LabeledDataset::new(2, vec![0.0; 3], vec![Label::A]).is_err());
        assert!(LabeledDataset::new(0, vec![], vec![]).is_err());
        assert!(LabeledDataset::new(1, vec![f64::NAN], vec![Label::A]).is_err());
    }

    #[test]
    fn class_split() {
        let ds = LabeledDataset::from_classes(1, &[vec![1.0], vec![2.0]], &[vec![3.0]]).unwrap();
        assert_eq!(ds.count(Label::A), 2);
        assert_eq!(ds.class_features(Label::B), vec![3.0]);
        assert_eq!(ds.swap_labels().count(Label::B), 2);
    }
}
