//! Brute-force references for the metrics, written to share no code path
//! with them: they sort their own copies of the scores, count directly, and
//! never touch [`Ecdf`](crate::Ecdf) or [`DeltaCurve`](crate::DeltaCurve).
//!
//! Only compiled for tests or with the `oracle` feature.

use crate::ecdf::GroupedPredictions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOracleConfig {
    pub grid_step: f64,
    /// Refuse grids that are not below half the smallest breakpoint gap.
    pub require_exact: bool,
}

impl GridOracleConfig {
    pub fn exact(grid_step: f64) -> Self {
        Self {
            grid_step,
            require_exact: true,
        }
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

struct Counter {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Counter {
    fn new(gp: &GroupedPredictions) -> Self {
        Self {
            a: sorted(gp.group0()),
            b: sorted(gp.group1()),
        }
    }

    fn delta(&self, y: f64) -> f64 {
        let ca = self.a.partition_point(|&v| v <= y);
        let cb = self.b.partition_point(|&v| v <= y);
        self.frac_diff(ca, cb)
    }

    fn frac_diff(&self, ca: usize, cb: usize) -> f64 {
        (ca as f64 / self.a.len() as f64 - cb as f64 / self.b.len() as f64).abs()
    }

    /// `delta` at `point(0), …, point(len − 1)`, ascending, by one forward scan.
    fn sweep(&self, len: usize, point: impl Fn(usize) -> f64) -> Vec<f64> {
        let (mut ca, mut cb) = (0, 0);
        let mut current = self.frac_diff(0, 0);
        (0..len)
            .map(|k| {
                let y = point(k);
                let (pa, pb) = (ca, cb);
                while ca < self.a.len() && self.a[ca] <= y {
                    ca += 1;
                }
                while cb < self.b.len() && self.b[cb] <= y {
                    cb += 1;
                }
                if (ca, cb) != (pa, pb) {
                    current = self.frac_diff(ca, cb);
                }
                current
            })
            .collect()
    }
}

/// Smallest gap between consecutive distinct values of `{0, 1} ∪ scores`.
pub fn min_breakpoint_gap(gp: &GroupedPredictions) -> f64 {
    let mut all: Vec<f64> = gp.group0().iter().chain(gp.group1()).copied().collect();
    all.push(0.0);
    all.push(1.0);
    all.sort_by(f64::total_cmp);
    all.dedup();
    all.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Dense-grid maximin: for every grid anchor `y₀`, the minimum of ΔF̂ over
/// grid points within `ε` of it (inside `[0, 1]`), maximized over anchors.
pub fn mcdp_grid_oracle(
    gp: &GroupedPredictions,
    epsilon: f64,
    cfg: GridOracleConfig,
) -> Result<f64> {
    Ok(mcdp_grid_oracle_many(gp, &[epsilon], cfg)?[0])
}

/// [`mcdp_grid_oracle`] at several `ε`, sharing one evaluation of the grid.
///
/// Window minima use block prefix/suffix minima, which keeps the cost linear
/// in the grid size for any `ε`.
pub fn mcdp_grid_oracle_many(
    gp: &GroupedPredictions,
    epsilons: &[f64],
    cfg: GridOracleConfig,
) -> Result<Vec<f64>> {
    let step = cfg.grid_step;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::OutOfRange {
            what: "grid_step",
            value: step,
        });
    }
    if let Some(&bad) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: bad,
        });
    }
    if cfg.require_exact {
        let min_gap = min_breakpoint_gap(gp);
        if step >= 0.5 * min_gap {
            return Err(Error::GridTooCoarse { step, min_gap });
        }
    }

    // grid: k·step for k·step < 1, then 1
    let interior = (0..).take_while(|&k| (k as f64) * step < 1.0).count();
    let n = interior + 1;
    let point = |k: usize| if k < interior { k as f64 * step } else { 1.0 };
    let values = Counter::new(gp).sweep(n, point);
    let mut prefix = vec![0.0; n];
    let mut suffix = vec![0.0; n];

    let mut out = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        if epsilon == 0.0 {
            out.push(values.iter().copied().fold(0.0, f64::max));
            continue;
        }
        // any block at least as long as every window works
        let width = ((2.0 * epsilon / step) as usize + 2).min(n);
        let chunks = values.chunks(width).zip(prefix.chunks_mut(width)).zip(suffix.chunks_mut(width));
        for ((v, p), q) in chunks {
            let mut m = f64::INFINITY;
            for (x, out) in v.iter().zip(p.iter_mut()) {
                m = if *x < m { *x } else { m };
                *out = m;
            }
            m = f64::INFINITY;
            for (x, out) in v.iter().zip(q.iter_mut()).rev() {
                m = if *x < m { *x } else { m };
                *out = m;
            }
        }

        // the window [lo, hi] of each anchor; both ends only move right, and
        // each end's offset within its block is tracked alongside it
        let (mut lo, mut hi) = (0usize, 0usize);
        let (mut lo_off, mut hi_off) = (0usize, 0usize);
        let mut best = 0.0f64;
        for i in 0..n {
            let y0 = point(i);
            while point(lo) < y0 - epsilon {
                lo += 1;
                lo_off = if lo_off + 1 == width { 0 } else { lo_off + 1 };
            }
            while hi + 1 < n && point(hi + 1) <= y0 + epsilon {
                hi += 1;
                hi_off = if hi_off + 1 == width { 0 } else { hi_off + 1 };
            }
            let same_block = hi - lo == hi_off.wrapping_sub(lo_off);
            let m = if !same_block {
                let (a, b) = (suffix[lo], prefix[hi]);
                if a < b {
                    a
                } else {
                    b
                }
            } else if lo_off == 0 {
                prefix[hi]
            } else if hi + 1 == n || hi_off + 1 == width {
                suffix[lo]
            } else {
                values[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min)
            };
            if m > best {
                best = m;
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Two-sample KS statistic `sup |F̂₀ − F̂₁|`, counting by linear scan at every
/// observed score and at 0. Quadratic; meant for small instances.
pub fn ks_statistic(gp: &GroupedPredictions) -> f64 {
    let (a, b) = (gp.group0(), gp.group1());
    let frac = |v: &[f64], y: f64| v.iter().filter(|&&s| s <= y).count() as f64 / v.len() as f64;
    std::iter::once(0.0)
        .chain(a.iter().chain(b).copied())
        .map(|y| (frac(a, y) - frac(b, y)).abs())
        .fold(0.0, f64::max)
}

/// Left-endpoint Riemann sum `Σ ΔF̂(k·step)·step` over `k·step ∈ [0, 1)`.
pub fn abcc_riemann(gp: &GroupedPredictions, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::OutOfRange {
            what: "step",
            value: step,
        });
    }
    let counter = Counter::new(gp);
    Ok((0..)
        .map(|k| k as f64 * step)
        .take_while(|&y| y < 1.0)
        .map(|y| counter.delta(y) * step)
        .sum())
}
