use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::Dataset;
use crate::error::{Error, Result};

/// Class separation along the group-independent feature.
const SIGNAL_F1: f64 = 0.5;
/// Class separation along the group-shifted feature.
const SIGNAL_F2: f64 = 0.4;
/// Group offset of the second feature at `bias = 1`.
const GROUP_SHIFT: f64 = 1.5;

/// Two-feature Gaussian classification data with a group-dependent shift.
///
/// Labels and groups are independent fair coins. `f1 ~ N(±SIGNAL_F1, 1)` by
/// class; `f2 ~ N(±SIGNAL_F2 ± bias·GROUP_SHIFT, 1)` by class and group, so a
/// classifier that leans on `f2` separates the groups' score distributions.
pub fn synth_dataset(seed: u64, n: usize, bias: f64) -> Result<Dataset> {
    if n < 100 {
        return Err(Error::InvalidConfig(format!("synthetic dataset needs n >= 100, got {n}")));
    }
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::OutOfRange { what: "bias", value: bias });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let y: u8 = rng.gen_range(0..=1);
        let s: u8 = rng.gen_range(0..=1);
        let cls = 2.0 * f64::from(y) - 1.0;
        let grp = 2.0 * f64::from(s) - 1.0;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        features.push(SIGNAL_F1 * cls + z1);
        features.push(SIGNAL_F2 * cls + bias * GROUP_SHIFT * grp + z2);
        labels.push(y);
        groups.push(s);
    }
    Dataset::new(2, features, labels, groups)
}
