//! Temperature-sigmoid surrogate for the CDF gap.

use crate::error::{Error, Result};

/// Exponents beyond this magnitude saturate the sigmoid.
pub const EXP_CLAMP: f64 = 500.0;

/// `σ_τ(x) = 1 / (1 + exp(−τx))`.
#[inline]
pub fn temp_sigmoid(x: f64, tau: f64) -> f64 {
    let z = (tau * x).clamp(-EXP_CLAMP, EXP_CLAMP);
    1.0 / (1.0 + (-z).exp())
}

/// `d σ_τ(x) / dx`; zero inside the saturated region.
#[inline]
pub fn temp_sigmoid_grad(x: f64, tau: f64) -> f64 {
    if (tau * x).abs() > EXP_CLAMP {
        return 0.0;
    }
    let s = temp_sigmoid(x, tau);
    tau * s * (1.0 - s)
}

/// Group sizes of a batch, failing when either group is absent.
pub(crate) fn group_sizes(groups: &[u8]) -> Result<(usize, usize)> {
    let n1 = groups.iter().filter(|&&g| g == 1).count();
    let n0 = groups.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyGroupInBatch);
    }
    Ok((n0, n1))
}

/// Signed smooth gap `mean₀ σ_τ(y − ŷᵢ) − mean₁ σ_τ(y − ŷᵢ)`.
pub(crate) fn signed_gap(scores: &[f64], groups: &[u8], n0: usize, n1: usize, y: f64, tau: f64) -> f64 {
    let (mut s0, mut s1) = (0.0, 0.0);
    for (&s, &g) in scores.iter().zip(groups) {
        let v = temp_sigmoid(y - s, tau);
        if g == 0 {
            s0 += v;
        } else {
            s1 += v;
        }
    }
    s0 / n0 as f64 - s1 / n1 as f64
}

/// `ΔF̃_τ(y)`, the differentiable stand-in for `|F̂₀(y) − F̂₁(y)|`.
pub fn delta_f_tilde(scores: &[f64], groups: &[u8], y: f64, tau: f64) -> Result<f64> {
    if scores.len() != groups.len() {
        return Err(Error::LengthMismatch {
            what: "groups",
            expected: scores.len(),
            found: groups.len(),
        });
    }
    let (n0, n1) = group_sizes(groups)?;
    Ok(signed_gap(scores, groups, n0, n1, y, tau).abs())
}

/// Maximizer of `ΔF̃_τ` over a uniform grid of `grid_count` points on
/// `[0, 1]` together with the batch's own scores. Ties go to the smallest
/// candidate.
pub fn find_y_star(scores: &[f64], groups: &[u8], tau: f64, grid_count: usize) -> Result<f64> {
    if grid_count < 2 {
        return Err(Error::InvalidConfig(format!(
            "y* grid needs at least 2 points, got {grid_count}"
        )));
    }
    if scores.len() != groups.len() {
        return Err(Error::LengthMismatch {
            what: "groups",
            expected: scores.len(),
            found: groups.len(),
        });
    }
    let (n0, n1) = group_sizes(groups)?;
    let last = (grid_count - 1) as f64;
    let mut candidates: Vec<f64> = (0..grid_count).map(|k| k as f64 / last).collect();
    candidates.extend_from_slice(scores);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best = (candidates[0], f64::NEG_INFINITY);
    for &y in &candidates {
        let v = signed_gap(scores, groups, n0, n1, y, tau).abs();
        if v > best.1 {
            best = (y, v);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecdf::GroupedPredictions;

    const SCORES: [f64; 4] = [0.1, 0.3, 0.4, 0.8];
    const GROUPS: [u8; 4] = [0, 1, 0, 1];

    #[test]
    fn sigmoid_values() {
        assert_eq!(temp_sigmoid(0.0, 3.0), 0.5);
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((temp_sigmoid(0.1, 10.0) - expected).abs() < 1e-15);
        assert!((temp_sigmoid(0.1, 10.0) - 0.731059).abs() < 1e-6);
        assert!((temp_sigmoid(-0.1, 10.0) - 0.268941).abs() < 1e-6);
        for x in [-0.7, -0.01, 0.2, 0.9] {
            assert!((temp_sigmoid(-x, 17.0) - (1.0 - temp_sigmoid(x, 17.0))).abs() < 1e-15);
        }
        // saturated, no overflow
        assert_eq!(temp_sigmoid(1.0, 1e6), 1.0);
        assert!(temp_sigmoid(-1.0, 1e6) < 1e-200);
        assert_eq!(temp_sigmoid_grad(1.0, 1e6), 0.0);
    }

    #[test]
    fn sigmoid_grad_matches_difference_quotient() {
        for (x, tau) in [(0.03, 20.0), (-0.2, 5.0), (0.0, 100.0)] {
            let h = 1e-7;
            let fd = (temp_sigmoid(x + h, tau) - temp_sigmoid(x - h, tau)) / (2.0 * h);
            assert!((temp_sigmoid_grad(x, tau) - fd).abs() < 1e-6 * tau);
        }
    }

    #[test]
    fn smooth_gap_saturates_to_step_gap() {
        let v = delta_f_tilde(&SCORES, &GROUPS, 0.2, 1000.0).unwrap();
        let gp = GroupedPredictions::new(&SCORES, &GROUPS, None).unwrap();
        let step = gp.delta_curve().eval(0.2).unwrap();
        assert_eq!(step, 0.5);
        assert!((v - step).abs() < 1e-6);
    }

    #[test]
    fn smooth_gap_small_temperature_is_linear() {
        let tau = 0.001;
        let v = delta_f_tilde(&SCORES, &GROUPS, 0.2, tau).unwrap();
        // σ_τ(x) ≈ 1/2 + τx/4, so the gap ≈ τ/4 · |mean₁ − mean₀| = τ/4 · 0.3
        let first_order = tau / 4.0 * 0.3;
        assert!((v - first_order).abs() < 1e-3 * first_order);
        assert!(v < 1e-4);
    }

    #[test]
    fn identical_groups_have_zero_gap() {
        let scores = [0.2, 0.6, 0.6, 0.2];
        let groups = [0, 0, 1, 1];
        for y in [0.0, 0.3, 0.61, 1.0] {
            for tau in [1.0, 20.0, 1e4] {
                assert_eq!(delta_f_tilde(&scores, &groups, y, tau).unwrap(), 0.0);
            }
        }
        assert_eq!(find_y_star(&scores, &groups, 20.0, 11).unwrap(), 0.0);
    }

    #[test]
    fn missing_group_is_an_error() {
        assert_eq!(
            delta_f_tilde(&[0.1, 0.2], &[1, 1], 0.5, 10.0),
            Err(Error::EmptyGroupInBatch)
        );
        assert_eq!(
            find_y_star(&[0.1, 0.2], &[0, 0], 10.0, 11),
            Err(Error::EmptyGroupInBatch)
        );
        assert!(find_y_star(&SCORES, &GROUPS, 10.0, 1).is_err());
    }

    #[test]
    fn y_star_examples() {
        let gp = GroupedPredictions::new(&SCORES, &GROUPS, None).unwrap();
        let curve = gp.delta_curve();
        let y = find_y_star(&SCORES, &GROUPS, 1000.0, 101).unwrap();
        assert_eq!(curve.eval(y).unwrap(), 0.5);

        let y = find_y_star(&[0.0, 1.0], &[0, 1], 50.0, 101).unwrap();
        assert_eq!(y, 0.5);
    }
}
