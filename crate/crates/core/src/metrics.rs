//! Demographic-parity violation metrics over [`GroupedPredictions`].
//!
//! * `ΔDP` as the gap in mean score, or in positive rate at a threshold.
//! * `ABCC`, the exact area between the two empirical CDFs.
//! * `MCDP(ε)`, the largest value `m` such that some `ε`-neighbourhood
//!   (clamped to `[0, 1]`) has `ΔF̂ >= m` everywhere. Three routes compute it:
//!   [`mcdp_exact`] walks every prediction as a window anchor (quadratic),
//!   [`mcdp_exact_fast`] returns the same value with a sliding-window minimum,
//!   and [`mcdp_approx`] scans a uniform grid of step `ε/K` and never
//!   underestimates.

use serde::{Deserialize, Serialize};

use crate::ecdf::{abs_fraction_diff, check_unit, delta_at, GroupedPredictions};
use crate::error::{Error, Result};
use crate::window::SlidingMin;

/// Upper bound on the number of grid samples the approximate route allocates.
pub const MAX_APPROX_SAMPLES: usize = 1 << 28;

/// `|mean(group0) − mean(group1)|`.
pub fn delta_dp_mean(gp: &GroupedPredictions) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    (mean(gp.group0()) - mean(gp.group1())).abs()
}

/// Gap in positive-decision rate, counting `ŷ >= threshold` as positive.
pub fn delta_dp_threshold(gp: &GroupedPredictions, threshold: f64) -> Result<f64> {
    check_unit("threshold", threshold)?;
    let positives = |v: &[f64]| v.iter().filter(|&&s| s >= threshold).count();
    Ok(abs_fraction_diff(
        positives(gp.group0()),
        gp.group0().len(),
        positives(gp.group1()),
        gp.group1().len(),
    ))
}

/// Area between the two empirical CDFs, integrated exactly over the steps.
pub fn abcc(gp: &GroupedPredictions) -> f64 {
    gp.delta_curve().integral()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    check_unit("epsilon", epsilon)
}

/// Reference exact MCDP(ε).
///
/// The predictions plus sentinels `0` and `1` are the only candidate left
/// endpoints; for each one `≤ 1 − ε` the minimum of ΔF̂ over predictions in
/// `[ŷᵢ, ŷᵢ + 2ε]` is taken, and the left-boundary window `[0, ε]` seeds the
/// running maximum. ΔF̂ is evaluated by binary search into each ECDF. Cost is
/// O(N²) in the worst case.
pub fn mcdp_exact(gp: &GroupedPredictions, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let (e0, e1) = gp.ecdfs();

    let mut points = Vec::with_capacity(gp.len() + 2);
    points.push(0.0);
    points.extend_from_slice(gp.group0());
    points.extend_from_slice(gp.group1());
    points.push(1.0);

    if epsilon == 0.0 {
        return Ok(points
            .iter()
            .map(|&y| delta_at(&e0, &e1, y))
            .fold(0.0, f64::max));
    }

    points.sort_by(f64::total_cmp);
    let deltas: Vec<f64> = points.iter().map(|&y| delta_at(&e0, &e1, y)).collect();

    let mut mcdp = points
        .iter()
        .zip(&deltas)
        .filter(|(&y, _)| y <= epsilon)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);

    let last_anchor = 1.0 - epsilon;
    for (i, &left) in points.iter().enumerate() {
        if left > last_anchor {
            break;
        }
        let reach = left + 2.0 * epsilon;
        let window_min = points[i..]
            .iter()
            .zip(&deltas[i..])
            .take_while(|(&y, _)| y <= reach)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        mcdp = mcdp.max(window_min);
    }
    Ok(mcdp)
}

/// Same value as [`mcdp_exact`] on every input, in O(N log N).
///
/// Works on the merged [`DeltaCurve`](crate::DeltaCurve) breakpoints; since
/// both the left endpoint and `left + 2ε` only move rightwards, the window
/// minimum is maintained by a monotone queue.
pub fn mcdp_exact_fast(gp: &GroupedPredictions, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let curve = gp.delta_curve();
    let (bp, values) = (curve.breakpoints(), curve.values());

    if epsilon == 0.0 {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }

    let mut mcdp = bp
        .iter()
        .zip(values)
        .take_while(|(&y, _)| y <= epsilon)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);

    let last_anchor = 1.0 - epsilon;
    let mut window = SlidingMin::new(values);
    let mut hi = 0;
    for (i, &left) in bp.iter().enumerate() {
        if left > last_anchor {
            break;
        }
        let reach = left + 2.0 * epsilon;
        while hi < bp.len() && bp[hi] <= reach {
            hi += 1;
        }
        if let Some(m) = window.min(i, hi) {
            mcdp = mcdp.max(m);
        }
    }
    Ok(mcdp)
}

/// Parameters of the grid-sampling approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    epsilon: f64,
    k: usize,
}

impl ApproxConfig {
    /// `epsilon` in `(0, 1]`, `k >= 1`.
    pub fn new(epsilon: f64, k: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: epsilon,
            });
        }
        if k == 0 {
            return Err(Error::InvalidK(k));
        }
        let cfg = Self { epsilon, k };
        if cfg.sample_count() > MAX_APPROX_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "epsilon={epsilon}, K={k} needs {} grid samples",
                cfg.sample_count()
            )));
        }
        Ok(cfg)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Grid step `δ = ε / K`.
    pub fn step(&self) -> f64 {
        self.epsilon / self.k as f64
    }

    /// Number of grid points `jδ < 1`, i.e. `⌈1/δ⌉`.
    pub fn sample_count(&self) -> usize {
        (1.0 / self.step()).ceil() as usize
    }

    /// True when `⌈1/δ⌉ − 2K < 1`: only the left-boundary window is scanned.
    pub fn is_degenerate(&self) -> bool {
        self.sample_count() < 2 * self.k + 1
    }
}

/// Grid-sampled MCDP(ε); never smaller than the exact value.
///
/// ΔF̂ is sampled at `jδ` for `j < ⌈1/δ⌉`. The running maximum starts from
/// the minimum over `j ∈ 0..=K` and then takes the minimum of every run of
/// `2K` consecutive samples starting at `j = 1 ..= ⌈1/δ⌉ − 2K`. When that
/// range is empty the boundary value is returned as is.
pub fn mcdp_approx(gp: &GroupedPredictions, cfg: ApproxConfig) -> Result<f64> {
    let (e0, e1) = gp.ecdfs();
    let step = cfg.step();
    let count = cfg.sample_count();
    let k = cfg.k();
    let deltas: Vec<f64> = (0..count)
        .map(|j| delta_at(&e0, &e1, j as f64 * step))
        .collect();

    let mut mcdp = deltas[..(k + 1).min(count)]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);

    let span = 2 * k;
    if count > span {
        for j in 1..=(count - span) {
            let m = deltas[j..j + span]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            mcdp = mcdp.max(m);
        }
    }
    Ok(mcdp)
}

/// Which route computed an MCDP value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "approximate")]
    Approximate,
    #[serde(rename = "exact-fast")]
    ExactFast,
}

/// One MCDP(ε) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McdpValue {
    pub epsilon: f64,
    pub algo: Algorithm,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    pub value: f64,
}

/// All metrics for one set of grouped predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub delta_dp_mean: f64,
    pub delta_dp_threshold: f64,
    pub threshold: f64,
    pub abcc: f64,
    pub mcdp: Vec<McdpValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub epsilons: Vec<f64>,
    pub algorithm: Algorithm,
    /// Sampling frequency, used by [`Algorithm::Approximate`] only.
    pub k: usize,
    pub threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            epsilons: vec![0.0],
            algorithm: Algorithm::Exact,
            k: 32,
            threshold: 0.5,
        }
    }
}

/// Compute every metric, one MCDP entry per requested `ε`.
pub fn evaluate(gp: &GroupedPredictions, opts: &EvalOptions) -> Result<MetricReport> {
    let mcdp = opts
        .epsilons
        .iter()
        .map(|&epsilon| {
            let (value, k) = match opts.algorithm {
                Algorithm::Exact => (mcdp_exact(gp, epsilon)?, None),
                Algorithm::ExactFast => (mcdp_exact_fast(gp, epsilon)?, None),
                Algorithm::Approximate => {
                    let cfg = ApproxConfig::new(epsilon, opts.k)?;
                    (mcdp_approx(gp, cfg)?, Some(opts.k))
                }
            };
            Ok(McdpValue {
                epsilon,
                algo: opts.algorithm,
                k,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport {
        delta_dp_mean: delta_dp_mean(gp),
        delta_dp_threshold: delta_dp_threshold(gp, opts.threshold)?,
        threshold: opts.threshold,
        abcc: abcc(gp),
        mcdp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn running() -> GroupedPredictions {
        GroupedPredictions::new(&[0.1, 0.3, 0.4, 0.8], &[0, 1, 0, 1], None).unwrap()
    }

    fn identical() -> GroupedPredictions {
        GroupedPredictions::from_groups(vec![0.2, 0.5, 0.9], vec![0.9, 0.2, 0.5]).unwrap()
    }

    fn extremes() -> GroupedPredictions {
        GroupedPredictions::from_groups(vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn delta_dp_examples() {
        assert!((delta_dp_mean(&running()) - 0.3).abs() < 1e-15);
        assert_eq!(delta_dp_mean(&identical()), 0.0);
        assert_eq!(delta_dp_mean(&extremes()), 1.0);

        assert_eq!(delta_dp_threshold(&running(), 0.5).unwrap(), 0.5);
        assert_eq!(delta_dp_threshold(&running(), 0.0).unwrap(), 0.0);
        assert_eq!(delta_dp_threshold(&identical(), 0.37).unwrap(), 0.0);
        assert!(delta_dp_threshold(&running(), 1.5).is_err());
    }

    #[test]
    fn abcc_examples() {
        assert!((abcc(&running()) - 0.3).abs() < 1e-15);
        assert_eq!(abcc(&identical()), 0.0);
        assert_eq!(abcc(&extremes()), 1.0);
    }

    #[test]
    fn exact_examples() {
        let gp = running();
        for f in [mcdp_exact, mcdp_exact_fast] {
            assert_eq!(f(&gp, 0.0).unwrap(), 0.5);
            assert_eq!(f(&gp, 0.15).unwrap(), 0.5);
            assert_eq!(f(&gp, 0.25).unwrap(), 0.0);
            for eps in [0.0, 0.1, 0.5, 1.0] {
                assert_eq!(f(&identical(), eps).unwrap(), 0.0);
            }
            assert!(matches!(f(&gp, -0.1), Err(Error::OutOfRange { .. })));
            assert!(matches!(f(&gp, 1.1), Err(Error::OutOfRange { .. })));
        }
    }

    #[test]
    fn large_epsilon_degrades_to_boundary_minimum() {
        // No score at 0, so the boundary window always includes ΔF̂(0) = 0.
        assert_eq!(mcdp_exact(&running(), 0.6).unwrap(), 0.0);
        // All of group 0 sits at 0: ΔF̂ = 1 on [0, 1).
        let gp = extremes();
        assert_eq!(mcdp_exact(&gp, 0.6).unwrap(), 1.0);
        assert_eq!(mcdp_exact_fast(&gp, 0.6).unwrap(), 1.0);
        assert_eq!(mcdp_exact(&gp, 1.0).unwrap(), 0.0);
        assert_eq!(mcdp_exact_fast(&gp, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn approx_examples() {
        let gp = running();
        assert_eq!(mcdp_approx(&gp, ApproxConfig::new(0.25, 1).unwrap()).unwrap(), 0.5);
        assert_eq!(mcdp_approx(&gp, ApproxConfig::new(0.25, 2).unwrap()).unwrap(), 0.0);
        for (eps, k) in [(0.05, 1), (0.25, 4), (0.6, 3)] {
            let cfg = ApproxConfig::new(eps, k).unwrap();
            assert_eq!(mcdp_approx(&identical(), cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn approx_config_validation() {
        assert!(matches!(ApproxConfig::new(0.0, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(ApproxConfig::new(1.5, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(ApproxConfig::new(f64::NAN, 1), Err(Error::OutOfRange { .. })));
        assert_eq!(ApproxConfig::new(0.1, 0), Err(Error::InvalidK(0)));
        assert!(matches!(ApproxConfig::new(1e-9, 1000), Err(Error::InvalidConfig(_))));
        let cfg = ApproxConfig::new(0.25, 1).unwrap();
        assert_eq!(cfg.sample_count(), 4);
        assert!(!cfg.is_degenerate());
        assert!(ApproxConfig::new(0.5, 1).unwrap().is_degenerate());
    }

    #[test]
    fn degenerate_grid_returns_boundary_value() {
        // δ = 0.5, samples {0, 0.5}: only the j ∈ {0, 1} minimum is taken.
        let gp = extremes();
        let cfg = ApproxConfig::new(0.5, 1).unwrap();
        assert!(cfg.is_degenerate());
        assert_eq!(mcdp_approx(&gp, cfg).unwrap(), 1.0);
        let cfg = ApproxConfig::new(1.0, 1).unwrap();
        assert_eq!(mcdp_approx(&gp, cfg).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_running_example() {
        let report = evaluate(&running(), &EvalOptions::default()).unwrap();
        assert!((report.delta_dp_mean - 0.3).abs() < 1e-15);
        assert_eq!(report.delta_dp_threshold, 0.5);
        assert_eq!(report.threshold, 0.5);
        assert!((report.abcc - 0.3).abs() < 1e-15);
        assert_eq!(report.mcdp.len(), 1);
        assert_eq!(report.mcdp[0].value, 0.5);
        assert_eq!(report.mcdp[0].k, None);

        let opts = EvalOptions {
            epsilons: vec![0.0, 0.05, 0.15, 0.25],
            ..EvalOptions::default()
        };
        let values: Vec<f64> = evaluate(&running(), &opts)
            .unwrap()
            .mcdp
            .iter()
            .map(|m| m.value)
            .collect();
        assert_eq!(values, vec![0.5, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn evaluate_identical_groups_is_all_zero() {
        let r = evaluate(&identical(), &EvalOptions::default()).unwrap();
        assert_eq!(r.delta_dp_mean, 0.0);
        assert_eq!(r.delta_dp_threshold, 0.0);
        assert_eq!(r.abcc, 0.0);
        assert_eq!(r.mcdp[0].value, 0.0);
    }

    #[test]
    fn evaluate_approx_records_k_and_rejects_zero_epsilon() {
        let opts = EvalOptions {
            epsilons: vec![0.25],
            algorithm: Algorithm::Approximate,
            k: 2,
            threshold: 0.5,
        };
        let r = evaluate(&running(), &opts).unwrap();
        assert_eq!(r.mcdp[0].k, Some(2));
        let opts = EvalOptions {
            epsilons: vec![0.0],
            ..opts
        };
        assert!(evaluate(&running(), &opts).is_err());
    }

    #[test]
    fn report_json_keys() {
        let r = evaluate(&running(), &EvalOptions::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["abcc", "delta_dp_mean", "delta_dp_threshold", "mcdp", "threshold"]
        );
        assert_eq!(v["mcdp"][0]["algo"], "exact");
        assert!(v["mcdp"][0].get("k").is_none());
    }

    fn instance() -> impl Strategy<Value = GroupedPredictions> {
        let score = prop_oneof![(0u32..=10).prop_map(|k| k as f64 / 10.0), 0.0..=1.0f64];
        (
            prop::collection::vec(score.clone(), 1..60),
            prop::collection::vec(score, 1..60),
        )
            .prop_map(|(a, b)| GroupedPredictions::from_groups(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn fast_equals_reference(gp in instance(), eps in prop_oneof![Just(0.0), 0.0..1.0f64]) {
            prop_assert_eq!(mcdp_exact_fast(&gp, eps).unwrap(), mcdp_exact(&gp, eps).unwrap());
        }

        #[test]
        fn approx_never_underestimates(gp in instance(), eps in 0.01..0.6f64, k in 1usize..20) {
            let exact = mcdp_exact(&gp, eps).unwrap();
            let approx = mcdp_approx(&gp, ApproxConfig::new(eps, k).unwrap()).unwrap();
            prop_assert!(approx >= exact - 1e-12, "approx {} < exact {}", approx, exact);
        }

        #[test]
        fn metrics_in_unit_range(gp in instance(), eps in 0.0..1.0f64, t in 0.0..1.0f64) {
            for v in [
                delta_dp_mean(&gp),
                delta_dp_threshold(&gp, t).unwrap(),
                abcc(&gp),
                mcdp_exact_fast(&gp, eps).unwrap(),
            ] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
