use super::model::{sigmoid, Dataset, LinearModel};
use super::smooth::{find_y_star, group_sizes, signed_gap, temp_sigmoid_grad};
use super::{Regularizer, TrainConfig};
use crate::error::Result;

/// Penalized batch loss and its gradient in `(weights, bias)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub bce: f64,
    /// Unscaled penalty value (before multiplying by λ).
    pub penalty: f64,
    /// The frozen `ŷ*` used by the `Mcdp` penalty.
    pub y_star: Option<f64>,
    /// True when the batch missed a group and the penalty was dropped.
    pub penalty_skipped: bool,
    pub grad: Vec<f64>,
}

/// Mean binary cross-entropy from a logit, `softplus(z) − y·z`.
#[inline]
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Penalty value and its derivative in each prediction.
fn penalty_and_score_grad(
    preds: &[f64],
    groups: &[u8],
    cfg: &TrainConfig,
    y_star: Option<f64>,
) -> Result<(f64, Vec<f64>)> {
    let (n0, n1) = group_sizes(groups)?;
    let weight = |g: u8| if g == 0 { 1.0 / n0 as f64 } else { -1.0 / n1 as f64 };
    let tau = cfg.tau;
    let mut dscore = vec![0.0; preds.len()];

    // d/dŷᵢ of signed_gap at y: −wᵢ σ'_τ(y − ŷᵢ)
    let add_gap_grad = |y: f64, scale: f64, dscore: &mut [f64]| {
        for ((d, &p), &g) in dscore.iter_mut().zip(preds).zip(groups) {
            *d -= scale * weight(g) * temp_sigmoid_grad(y - p, tau);
        }
    };

    let penalty = match cfg.regularizer {
        Regularizer::None => 0.0,
        Regularizer::Dp => {
            let (mut s0, mut s1) = (0.0, 0.0);
            for (&p, &g) in preds.iter().zip(groups) {
                if g == 0 {
                    s0 += p;
                } else {
                    s1 += p;
                }
            }
            let gap = s0 / n0 as f64 - s1 / n1 as f64;
            let s = sign(gap);
            for (d, &g) in dscore.iter_mut().zip(groups) {
                *d = s * weight(g);
            }
            gap.abs()
        }
        Regularizer::Mcdp => {
            let y = match y_star {
                Some(y) => y,
                None => find_y_star(preds, groups, tau, cfg.ystar_grid)?,
            };
            let gap = signed_gap(preds, groups, n0, n1, y, tau);
            add_gap_grad(y, sign(gap), &mut dscore);
            gap.abs()
        }
        Regularizer::Abcc => {
            let m = cfg.ystar_grid;
            let mut total = 0.0;
            for j in 0..m {
                let y = (j as f64 + 0.5) / m as f64;
                let gap = signed_gap(preds, groups, n0, n1, y, tau);
                total += gap.abs();
                add_gap_grad(y, sign(gap) / m as f64, &mut dscore);
            }
            total / m as f64
        }
    };
    Ok((penalty, dscore))
}

/// Loss and gradient with `ŷ*` found from the batch's current predictions
/// (only consulted by the `Mcdp` penalty).
pub fn loss_and_grad(model: &LinearModel, batch: &Dataset, cfg: &TrainConfig) -> Result<LossGrad> {
    loss_and_grad_impl(model, batch, cfg, None)
}

/// Loss and gradient with `ŷ*` pinned; no gradient flows through `ŷ*`.
pub fn loss_and_grad_at(
    model: &LinearModel,
    batch: &Dataset,
    cfg: &TrainConfig,
    y_star: f64,
) -> Result<LossGrad> {
    loss_and_grad_impl(model, batch, cfg, Some(y_star))
}

fn loss_and_grad_impl(
    model: &LinearModel,
    batch: &Dataset,
    cfg: &TrainConfig,
    y_star: Option<f64>,
) -> Result<LossGrad> {
    let b = batch.len() as f64;
    let logits: Vec<f64> = (0..batch.len()).map(|i| model.logit(batch.row(i))).collect();
    let preds: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();

    let mut bce = 0.0;
    let mut dlogit: Vec<f64> = Vec::with_capacity(batch.len());
    for ((&z, &p), &y) in logits.iter().zip(&preds).zip(batch.labels()) {
        let y = f64::from(y);
        bce += bce_from_logit(z, y);
        dlogit.push((p - y) / b);
    }
    bce /= b;

    let mut penalty = 0.0;
    let mut used_y_star = None;
    let mut penalty_skipped = false;
    if cfg.penalized() {
        if batch.has_both_groups() {
            let y_star = match (cfg.regularizer, y_star) {
                (Regularizer::Mcdp, None) => Some(find_y_star(&preds, batch.groups(), cfg.tau, cfg.ystar_grid)?),
                (_, y) => y,
            };
            let (value, dscore) = penalty_and_score_grad(&preds, batch.groups(), cfg, y_star)?;
            penalty = value;
            if cfg.regularizer == Regularizer::Mcdp {
                used_y_star = y_star;
            }
            for ((dl, &p), ds) in dlogit.iter_mut().zip(&preds).zip(dscore) {
                *dl += cfg.lambda * ds * p * (1.0 - p);
            }
        } else {
            penalty_skipped = true;
        }
    }

    let d = batch.n_features();
    let mut grad = vec![0.0; d + 1];
    for (i, &dl) in dlogit.iter().enumerate() {
        for (g, &x) in grad[..d].iter_mut().zip(batch.row(i)) {
            *g += dl * x;
        }
        grad[d] += dl;
    }

    let lambda_term = if cfg.penalized() { cfg.lambda * penalty } else { 0.0 };
    Ok(LossGrad {
        loss: bce + lambda_term,
        bce,
        penalty,
        y_star: used_y_star,
        penalty_skipped,
        grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difftrain::synth_dataset;
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(reg: Regularizer, lambda: f64) -> TrainConfig {
        TrainConfig {
            lambda,
            regularizer: reg,
            tau: 20.0,
            ystar_grid: 51,
            ..TrainConfig::default()
        }
    }

    fn small_batch() -> Dataset {
        Dataset::new(
            2,
            vec![0.5, -1.0, 1.5, 0.2, -0.3, 0.8, 2.0, -0.5, 0.1, 0.1],
            vec![1, 0, 1, 1, 0],
            vec![0, 1, 0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn unpenalized_grad_is_logistic_regression_grad() {
        let model = LinearModel {
            weights: vec![0.3, -0.7],
            bias: 0.1,
        };
        let batch = small_batch();
        let lg = loss_and_grad(&model, &batch, &cfg(Regularizer::Mcdp, 0.0)).unwrap();
        let mut expected = vec![0.0; 3];
        for i in 0..batch.len() {
            let r = model.predict(batch.row(i)) - f64::from(batch.labels()[i]);
            expected[0] += r * batch.row(i)[0] / 5.0;
            expected[1] += r * batch.row(i)[1] / 5.0;
            expected[2] += r / 5.0;
        }
        for (a, e) in lg.grad.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(lg.loss, lg.bce);
        assert_eq!(lg.penalty, 0.0);
    }

    #[test]
    fn dp_penalty_vanishes_at_symmetric_start() {
        let batch = small_batch();
        let with = loss_and_grad(&LinearModel::zeros(2), &batch, &cfg(Regularizer::Dp, 1.0)).unwrap();
        let without = loss_and_grad(&LinearModel::zeros(2), &batch, &cfg(Regularizer::None, 1.0)).unwrap();
        assert_eq!(with.penalty, 0.0);
        assert_eq!(with.grad, without.grad);
    }

    #[test]
    fn missing_group_skips_penalty() {
        let batch = small_batch().select(&[1, 3, 4]);
        let lg = loss_and_grad(&LinearModel::zeros(2), &batch, &cfg(Regularizer::Mcdp, 0.5)).unwrap();
        assert!(lg.penalty_skipped);
        assert_eq!(lg.loss, lg.bce);
        assert_eq!(
            penalty_and_score_grad(&[0.2, 0.3], &[1, 1], &cfg(Regularizer::Dp, 1.0), None).unwrap_err(),
            Error::EmptyGroupInBatch
        );
    }

    fn finite_difference(model: &LinearModel, batch: &Dataset, cfg: &TrainConfig, y_star: f64) -> Vec<f64> {
        let h = 1e-6;
        let params = model.params();
        (0..params.len())
            .map(|k| {
                let mut m = model.clone();
                let mut p = params.clone();
                p[k] += h;
                m.set_params(&p);
                let up = loss_and_grad_at(&m, batch, cfg, y_star).unwrap().loss;
                p[k] -= 2.0 * h;
                m.set_params(&p);
                let down = loss_and_grad_at(&m, batch, cfg, y_star).unwrap().loss;
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn grad_matches_finite_differences_with_pinned_y_star() {
        let data = synth_dataset(3, 400, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for reg in [Regularizer::None, Regularizer::Dp, Regularizer::Abcc, Regularizer::Mcdp] {
            let c = cfg(reg, 0.7);
            for _ in 0..5 {
                let model = LinearModel {
                    weights: (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect(),
                    bias: rng.gen_range(-0.5..0.5),
                };
                let idx: Vec<usize> = (0..64).map(|_| rng.gen_range(0..data.len())).collect();
                let batch = data.select(&idx);
                // any frozen ŷ* gives a valid gradient of ΔF̃_τ(ŷ*)
                let y_star = rng.gen_range(0.0..1.0);
                let lg = loss_and_grad_at(&model, &batch, &c, y_star).unwrap();
                let fd = finite_difference(&model, &batch, &c, y_star);
                for (a, f) in lg.grad.iter().zip(&fd) {
                    let rel = (a - f).abs() / a.abs().max(f.abs()).max(1e-3);
                    assert!(rel < 1e-5, "{reg:?}: analytic {a} vs fd {f}");
                }
            }
        }
    }
}
