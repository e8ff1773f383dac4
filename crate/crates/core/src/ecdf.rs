//! Per-group empirical CDFs and the step curve of their absolute difference.
//!
//! Every cumulative fraction is computed as `count / n` at query time, so two
//! routes that agree on the count agree on the value bit-for-bit.

use crate::error::{Error, Result};

/// Classifier scores in `[0, 1]` split by a binary sensitive attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPredictions {
    group0: Vec<f64>,
    group1: Vec<f64>,
    labels: Option<Vec<u8>>,
}

impl GroupedPredictions {
    /// Route `scores` into groups by `groups[i]`.
    ///
    /// Validation order is fixed: lengths, then score range, then group/label
    /// values, then group emptiness.
    pub fn new(scores: &[f64], groups: &[u8], labels: Option<&[u8]>) -> Result<Self> {
        if groups.len() != scores.len() {
            return Err(Error::LengthMismatch {
                what: "groups",
                expected: scores.len(),
                found: groups.len(),
            });
        }
        if let Some(labels) = labels {
            if labels.len() != scores.len() {
                return Err(Error::LengthMismatch {
                    what: "labels",
                    expected: scores.len(),
                    found: labels.len(),
                });
            }
        }
        for &s in scores {
            check_unit("score", s)?;
        }
        check_binary("groups", groups)?;
        if let Some(labels) = labels {
            check_binary("labels", labels)?;
        }

        let mut group0 = Vec::new();
        let mut group1 = Vec::new();
        for (&s, &g) in scores.iter().zip(groups) {
            if g == 0 {
                group0.push(s);
            } else {
                group1.push(s);
            }
        }
        Self::check_nonempty(&group0, &group1)?;
        Ok(Self {
            group0,
            group1,
            labels: labels.map(<[u8]>::to_vec),
        })
    }

    /// Build directly from the two per-group score lists.
    pub fn from_groups(group0: Vec<f64>, group1: Vec<f64>) -> Result<Self> {
        for &s in group0.iter().chain(&group1) {
            check_unit("score", s)?;
        }
        Self::check_nonempty(&group0, &group1)?;
        Ok(Self {
            group0,
            group1,
            labels: None,
        })
    }

    fn check_nonempty(group0: &[f64], group1: &[f64]) -> Result<()> {
        if group0.is_empty() {
            return Err(Error::EmptyGroup(0));
        }
        if group1.is_empty() {
            return Err(Error::EmptyGroup(1));
        }
        Ok(())
    }

    pub fn group0(&self) -> &[f64] {
        &self.group0
    }

    pub fn group1(&self) -> &[f64] {
        &self.group1
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Total number of scores across both groups.
    pub fn len(&self) -> usize {
        self.group0.len() + self.group1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Apply `f` to every score, re-validating the result.
    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let group0 = self.group0.iter().map(|&s| f(s)).collect();
        let group1 = self.group1.iter().map(|&s| f(s)).collect();
        let mut out = Self::from_groups(group0, group1)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Sorted ECDFs of group 0 and group 1.
    pub fn ecdfs(&self) -> (Ecdf, Ecdf) {
        (
            Ecdf::from_unsorted(self.group0.clone()),
            Ecdf::from_unsorted(self.group1.clone()),
        )
    }

    pub fn delta_curve(&self) -> DeltaCurve {
        let (e0, e1) = self.ecdfs();
        DeltaCurve::new(&e0, &e1)
    }
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value })
    }
}

fn check_binary(what: &'static str, values: &[u8]) -> Result<()> {
    match values.iter().position(|&v| v > 1) {
        Some(index) => Err(Error::NotBinary {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// `|c0/n0 - c1/n1|`, the one expression every ΔF̂ route evaluates.
#[inline]
pub(crate) fn abs_fraction_diff(c0: usize, n0: usize, c1: usize, n1: usize) -> f64 {
    (c0 as f64 / n0 as f64 - c1 as f64 / n1 as f64).abs()
}

/// Empirical CDF over a multiset of samples: `F(y) = #{v <= y} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Sorts `values`. Panics if `values` is empty or contains NaN.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "ECDF needs at least one sample");
        values.sort_by(|a, b| a.partial_cmp(b).expect("NaN in ECDF samples"));
        Self { sorted: values }
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// Number of samples `<= y` (rightmost insertion point).
    #[inline]
    pub fn count_le(&self, y: f64) -> usize {
        self.sorted.partition_point(|&v| v <= y)
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        self.count_le(y) as f64 / self.n() as f64
    }
}

/// |ΔF̂| evaluated through two ECDFs at an arbitrary point.
#[inline]
pub fn delta_at(e0: &Ecdf, e1: &Ecdf, y: f64) -> f64 {
    abs_fraction_diff(e0.count_le(y), e0.n(), e1.count_le(y), e1.n())
}

/// The step function `ΔF̂(y) = |F̂₀(y) − F̂₁(y)|` on `[0, 1]`.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; the last value
/// is the value at `y = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCurve {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl DeltaCurve {
    /// Merge both ECDFs' samples with `{0, 1}` in a single linear sweep.
    ///
    /// Both ECDFs must be built from scores in `[0, 1]`.
    pub fn new(e0: &Ecdf, e1: &Ecdf) -> Self {
        let (a, b) = (e0.sorted_values(), e1.sorted_values());
        let (n0, n1) = (a.len(), b.len());
        let mut breakpoints = Vec::with_capacity(n0 + n1 + 2);
        let mut values = Vec::with_capacity(n0 + n1 + 2);
        let (mut i, mut j) = (0, 0);
        let mut push = |y: f64, i: &mut usize, j: &mut usize| {
            while *i < n0 && a[*i] <= y {
                *i += 1;
            }
            while *j < n1 && b[*j] <= y {
                *j += 1;
            }
            breakpoints.push(y);
            values.push(abs_fraction_diff(*i, n0, *j, n1));
        };
        push(0.0, &mut i, &mut j);
        loop {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => break,
            };
            if next >= 1.0 {
                break;
            }
            push(next, &mut i, &mut j);
        }
        push(1.0, &mut i, &mut j);
        Self {
            breakpoints,
            values,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Point query; `y` must lie in `[0, 1]`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        check_unit("y", y)?;
        let idx = self.breakpoints.partition_point(|&b| b <= y) - 1;
        Ok(self.values[idx])
    }

    /// Exact integral over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .sum()
    }
}
