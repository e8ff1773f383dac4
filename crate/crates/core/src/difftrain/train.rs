use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::loss::loss_and_grad;
use super::model::{Dataset, LinearModel};
use super::{Optimizer, TrainConfig};
use crate::ecdf::GroupedPredictions;
use crate::error::{Error, Result};
use crate::metrics::{evaluate, Algorithm, EvalOptions, MetricReport};

/// Standard deviation of the initial weights.
const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean penalized loss over the epoch's batches.
    pub loss: f64,
    pub bce: f64,
    /// Mean unscaled penalty over batches where it was applied.
    pub penalty: f64,
    /// `ŷ*` of the epoch's last penalized batch.
    pub y_star: Option<f64>,
    pub skipped_batches: usize,
    pub validation: MetricReport,
    pub validation_ap: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

/// Average precision: `Σₙ (Rₙ − Rₙ₋₁) Pₙ` over descending distinct scores.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> f64 {
    let total_pos = labels.iter().filter(|&&l| l == 1).count();
    if total_pos == 0 || scores.len() != labels.len() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut seen) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += usize::from(labels[order[i]] == 1);
            seen += 1;
            i += 1;
        }
        let recall = tp as f64 / total_pos as f64;
        ap += (recall - prev_recall) * (tp as f64 / seen as f64);
        prev_recall = recall;
    }
    ap
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

fn validation_report(model: &LinearModel, data: &Dataset) -> Result<(MetricReport, f64)> {
    let preds = model.predict_all(data);
    let gp = GroupedPredictions::new(&preds, data.groups(), Some(data.labels()))?;
    let opts = EvalOptions {
        algorithm: Algorithm::ExactFast,
        ..EvalOptions::default()
    };
    Ok((evaluate(&gp, &opts)?, average_precision(&preds, data.labels())))
}

/// Train on `data`, reporting per-epoch metrics on the training set itself.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<(LinearModel, TrainHistory)> {
    train_with_validation(data, data, cfg)
}

/// Mini-batch training: each epoch is one shuffled pass over `data` in
/// batches of `cfg.batch_size`, with `ŷ*` refreshed per batch.
pub fn train_with_validation(
    data: &Dataset,
    validation: &Dataset,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainHistory)> {
    cfg.validate()?;
    if !data.has_both_groups() {
        return Err(Error::InvalidConfig("training data must contain both groups".into()));
    }
    if !validation.has_both_groups() {
        return Err(Error::InvalidConfig("validation data must contain both groups".into()));
    }
    if validation.n_features() != data.n_features() {
        return Err(Error::LengthMismatch {
            what: "validation features",
            expected: data.n_features(),
            found: validation.n_features(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = Normal::new(0.0, INIT_SCALE).expect("valid normal");
    let mut model = LinearModel {
        weights: (0..data.n_features()).map(|_| init.sample(&mut rng)).collect(),
        bias: 0.0,
    };
    let mut params = model.params();
    let mut adam = Adam::new(params.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = TrainHistory::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss, mut bce, mut penalty) = (0.0, 0.0, 0.0);
        let (mut batches, mut penalized, mut skipped) = (0usize, 0usize, 0usize);
        let mut y_star = None;
        for idx in order.chunks(cfg.batch_size) {
            let batch = data.select(idx);
            let lg = loss_and_grad(&model, &batch, cfg)?;
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in params.iter_mut().zip(&lg.grad) {
                        *p -= cfg.learning_rate * g;
                    }
                }
                Optimizer::Adam => adam.step(&mut params, &lg.grad, cfg.learning_rate),
            }
            model.set_params(&params);

            loss += lg.loss;
            bce += lg.bce;
            batches += 1;
            if lg.penalty_skipped {
                skipped += 1;
            } else if cfg.penalized() {
                penalty += lg.penalty;
                penalized += 1;
                y_star = lg.y_star.or(y_star);
            }
        }
        let (report, ap) = validation_report(&model, validation)?;
        history.records.push(EpochRecord {
            epoch,
            loss: loss / batches as f64,
            bce: bce / batches as f64,
            penalty: if penalized > 0 { penalty / penalized as f64 } else { 0.0 },
            y_star,
            skipped_batches: skipped,
            validation: report,
            validation_ap: ap,
        });
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difftrain::{synth_dataset, Regularizer};

    #[test]
    fn ap_examples() {
        // sklearn: average_precision_score([0,0,1,1], [0.1,0.4,0.35,0.8]) = 0.8333…
        let ap = average_precision(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]);
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(average_precision(&[0.9, 0.8, 0.1], &[1, 1, 0]), 1.0);
        // a single tie block: precision 0.5 at recall 1
        assert_eq!(average_precision(&[0.5; 4], &[1, 0, 1, 0]), 0.5);
        assert_eq!(average_precision(&[0.5, 0.4], &[0, 0]), 0.0);
    }

    fn separable() -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for i in 0..200 {
            let y = (i % 2) as u8;
            let x = if y == 1 { 1.0 } else { -1.0 } + 0.3 * ((i * 37 % 17) as f64 / 17.0 - 0.5);
            features.extend([x, (i % 7) as f64 / 7.0]);
            labels.push(y);
            groups.push(((i / 2) % 2) as u8);
        }
        Dataset::new(2, features, labels, groups).unwrap()
    }

    #[test]
    fn erm_loss_decreases_on_separable_data() {
        let cfg = TrainConfig {
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.5,
            ..TrainConfig::default()
        };
        let (_, history) = train(&separable(), &cfg).unwrap();
        assert_eq!(history.records.len(), 10);
        for w in history.records.windows(2) {
            assert!(w[1].loss < w[0].loss, "{} !< {}", w[1].loss, w[0].loss);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = synth_dataset(5, 600, 1.0).unwrap();
        let cfg = TrainConfig {
            lambda: 0.2,
            regularizer: Regularizer::Mcdp,
            epochs: 3,
            batch_size: 64,
            seed: 9,
            ..TrainConfig::default()
        };
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.1.records.iter().all(|r| r.y_star.is_some()));
    }

    #[test]
    fn tiny_batches_record_skips() {
        let data = separable();
        let cfg = TrainConfig {
            lambda: 0.5,
            regularizer: Regularizer::Dp,
            epochs: 2,
            batch_size: 1,
            ..TrainConfig::default()
        };
        let (_, h) = train(&data, &cfg).unwrap();
        assert!(h.records.iter().all(|r| r.skipped_batches == data.len()));
    }

    #[test]
    fn rejects_single_group_data() {
        let d = Dataset::new(1, vec![0.0, 1.0], vec![0, 1], vec![1, 1]).unwrap();
        assert!(train(&d, &TrainConfig::default()).is_err());
    }
}
