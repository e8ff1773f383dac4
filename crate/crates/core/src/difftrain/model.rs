use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tabular training data: row-major features, binary labels and groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
    groups: Vec<u8>,
}

impl Dataset {
    pub fn new(n_features: usize, features: Vec<f64>, labels: Vec<u8>, groups: Vec<u8>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::LengthMismatch {
                what: "features",
                expected: labels.len() * n_features,
                found: features.len(),
            });
        }
        if groups.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "groups",
                expected: labels.len(),
                found: groups.len(),
            });
        }
        for (what, values) in [("labels", &labels), ("groups", &groups)] {
            if let Some(index) = values.iter().position(|&v| v > 1) {
                return Err(Error::NotBinary {
                    what,
                    index,
                    value: values[index],
                });
            }
        }
        if let Some(&value) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::OutOfRange {
                what: "feature",
                value,
            });
        }
        Ok(Self {
            n_features,
            features,
            labels,
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn groups(&self) -> &[u8] {
        &self.groups
    }

    pub fn has_both_groups(&self) -> bool {
        self.groups.contains(&0) && self.groups.contains(&1)
    }

    /// Copy of the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            n_features: self.n_features,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    /// First `⌊fraction·n⌋` rows and the rest.
    pub fn split(&self, fraction: f64) -> (Self, Self) {
        let cut = ((self.len() as f64 * fraction).floor() as usize).min(self.len());
        let head: Vec<usize> = (0..cut).collect();
        let tail: Vec<usize> = (cut..self.len()).collect();
        (self.select(&head), self.select(&tail))
    }
}

/// Logistic regression `f(x) = σ(wᵀx + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(n_features: usize) -> Self {
        Self {
            weights: vec![0.0; n_features],
            bias: 0.0,
        }
    }

    /// Number of parameters (weights then bias).
    pub fn n_params(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let d = self.weights.len();
        self.weights.copy_from_slice(&params[..d]);
        self.bias = params[d];
    }

    #[inline]
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn predict_all(&self, data: &Dataset) -> Vec<f64> {
        (0..data.len()).map(|i| self.predict(data.row(i))).collect()
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(2, vec![0.0; 4], vec![0, 1], vec![0, 1]).is_ok());
        assert!(matches!(
            Dataset::new(2, vec![0.0; 3], vec![0, 1], vec![0, 1]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Dataset::new(1, vec![0.0; 2], vec![0, 3], vec![0, 1]),
            Err(Error::NotBinary { what: "labels", .. })
        ));
        assert!(matches!(
            Dataset::new(1, vec![0.0, f64::NAN], vec![0, 1], vec![0, 1]),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn select_and_split() {
        let d = Dataset::new(2, (0..8).map(f64::from).collect(), vec![0, 1, 0, 1], vec![1, 1, 0, 0]).unwrap();
        let s = d.select(&[3, 0]);
        assert_eq!(s.row(0), &[6.0, 7.0]);
        assert_eq!(s.labels(), &[1, 0]);
        let (a, b) = d.split(0.75);
        assert_eq!((a.len(), b.len()), (3, 1));
        assert_eq!(b.groups(), &[0]);
    }

    #[test]
    fn prediction_is_logistic() {
        let m = LinearModel {
            weights: vec![2.0, -1.0],
            bias: 0.5,
        };
        let z: f64 = 2.0 * 0.3 - 0.2 + 0.5;
        assert!((m.predict(&[0.3, 0.2]) - 1.0 / (1.0 + (-z).exp())).abs() < 1e-15);
        assert!((sigmoid(-30.0) - (-30.0f64).exp() / (1.0 + (-30.0f64).exp())).abs() < 1e-25);
        let mut m2 = LinearModel::zeros(2);
        m2.set_params(&m.params());
        assert_eq!(m, m2);
    }
}
