//! Fairness-regularized training of a logistic classifier.
//!
//! Each mini-batch step first fixes `ŷ*`, the point where the smooth CDF gap
//! `ΔF̃_τ` of the current predictions peaks, and then descends
//! `BCE + λ·ΔF̃_τ(ŷ*)` with `ŷ*` held constant.

mod loss;
mod model;
mod smooth;
mod synth;
mod train;

pub use loss::{loss_and_grad, loss_and_grad_at, LossGrad};
pub use model::{Dataset, LinearModel};
pub use smooth::{delta_f_tilde, find_y_star, temp_sigmoid, temp_sigmoid_grad, EXP_CLAMP};
pub use synth::synth_dataset;
pub use train::{average_precision, train, train_with_validation, EpochRecord, TrainHistory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fairness penalty added to the classification loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    /// Plain empirical risk minimization.
    None,
    /// `|mean₀ ŷ − mean₁ ŷ|`.
    Dp,
    /// Midpoint quadrature of `ΔF̃_τ` over `[0, 1]`.
    Abcc,
    /// `ΔF̃_τ(ŷ*)` at the batch's smooth-gap maximizer.
    Mcdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub tau: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub regularizer: Regularizer,
    /// Grid size for the `ŷ*` search, and quadrature nodes for `Abcc`.
    pub ystar_grid: usize,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            tau: 20.0,
            epochs: 20,
            batch_size: 256,
            learning_rate: 0.1,
            seed: 0,
            regularizer: Regularizer::None,
            ystar_grid: 101,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if self.epochs == 0 {
            return bad("epochs must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if self.ystar_grid < 2 {
            return bad(format!("y* grid needs at least 2 points, got {}", self.ystar_grid));
        }
        Ok(())
    }

    /// Whether the λ term contributes to the loss at all.
    pub fn penalized(&self) -> bool {
        self.regularizer != Regularizer::None && self.lambda > 0.0
    }
}
