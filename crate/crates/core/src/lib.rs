//! Demographic-parity violation metrics for binary-group classifiers.
//!
//! Scores in `[0, 1]` are split by a binary sensitive attribute into
//! [`GroupedPredictions`]. From their empirical CDFs the crate computes the
//! mean and threshold `ΔDP`, the area between the CDF curves (`ABCC`), and
//! `MCDP(ε)`, the maximal CDF gap that persists over a whole
//! `ε`-neighbourhood of predictions, by an exact and an approximate route.
//! [`difftrain`] trains a logistic classifier against a smooth surrogate of
//! the same gap.

pub mod difftrain;
pub mod ecdf;
pub mod error;
pub mod metrics;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod window;

pub use ecdf::{delta_at, DeltaCurve, Ecdf, GroupedPredictions};
pub use error::{Error, Result};
pub use metrics::{
    abcc, delta_dp_mean, delta_dp_threshold, evaluate, mcdp_approx, mcdp_exact, mcdp_exact_fast,
    Algorithm, ApproxConfig, EvalOptions, McdpValue, MetricReport,
};
