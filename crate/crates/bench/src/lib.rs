//! Error and speed of the approximate MCDP route against the exact one.
//!
//! For each instance and `ε` the exact value and timing are measured once,
//! then every `K` is run through the approximate route. Errors are relative,
//! `(V_a − V_e) / V_e`, unless `V_e` falls below [`ERR_FLOOR`], in which case
//! the absolute difference is reported and flagged. Speedup is `T_e / T_a`.

use std::time::Instant;

use mcdp_core::{mcdp_approx, mcdp_exact, mcdp_exact_fast, ApproxConfig, GroupedPredictions, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

pub use mcdp_core;

/// Exact values below this switch the error column to absolute error.
pub const ERR_FLOOR: f64 = 1e-3;

/// CSV header matching [`BenchRow::csv_line`].
pub const CSV_HEADER: &str =
    "n,epsilon,k,v_exact,v_approx,err,err_is_abs,t_exact,t_approx,speedup,t_exact_fast";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub epsilon: f64,
    pub k: usize,
    pub v_exact: f64,
    pub v_approx: f64,
    /// Relative error, or absolute error when `err_is_abs`.
    pub err: f64,
    pub err_is_abs: bool,
    /// Median wall-clock seconds.
    pub t_exact: f64,
    pub t_approx: f64,
    pub speedup: f64,
    /// Median seconds of the sliding-window exact route, when timed.
    pub t_exact_fast: Option<f64>,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:e},{:e},{},{}",
            self.n,
            self.epsilon,
            self.k,
            self.v_exact,
            self.v_approx,
            self.err,
            self.err_is_abs,
            self.t_exact,
            self.t_approx,
            self.speedup,
            self.t_exact_fast.map(|t| format!("{t:e}")).unwrap_or_default(),
        )
    }
}

/// `(err, err_is_abs)` for one exact/approximate pair.
pub fn approximation_error(v_exact: f64, v_approx: f64) -> (f64, bool) {
    if v_exact >= ERR_FLOOR {
        ((v_approx - v_exact) / v_exact, false)
    } else {
        (v_approx - v_exact, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    /// Timed repetitions after one discarded warm-up call; at least 3.
    pub reps: usize,
    pub time_fast: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            reps: 3,
            time_fast: false,
        }
    }
}

/// Median wall-clock seconds of `reps` calls, after one warm-up call whose
/// result is returned alongside.
pub fn time_median<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let value = f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(f()?);
        times.push(start.elapsed().as_secs_f64().max(1e-9));
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    let median = if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    };
    Ok((value, median))
}

/// One row per `(instance, ε, K)`, `K` in the order given.
///
/// `ε = 0` has no approximate counterpart and is rejected by the
/// approximate route's validation.
pub fn run_bench(
    instances: &[GroupedPredictions],
    eps_list: &[f64],
    k_list: &[usize],
    opts: BenchOptions,
) -> Result<Vec<BenchRow>> {
    if opts.reps < 3 {
        return Err(mcdp_core::Error::InvalidConfig(format!(
            "at least 3 timing repetitions required, got {}",
            opts.reps
        )));
    }
    let mut rows = Vec::new();
    for gp in instances {
        for &epsilon in eps_list {
            let configs = k_list
                .iter()
                .map(|&k| ApproxConfig::new(epsilon, k))
                .collect::<Result<Vec<_>>>()?;
            let (v_exact, t_exact) = time_median(opts.reps, || mcdp_exact(gp, epsilon))?;
            let t_exact_fast = if opts.time_fast {
                Some(time_median(opts.reps, || mcdp_exact_fast(gp, epsilon))?.1)
            } else {
                None
            };
            for cfg in configs {
                let (v_approx, t_approx) = time_median(opts.reps, || mcdp_approx(gp, cfg))?;
                let (err, err_is_abs) = approximation_error(v_exact, v_approx);
                rows.push(BenchRow {
                    n: gp.len(),
                    epsilon,
                    k: cfg.k(),
                    v_exact,
                    v_approx,
                    err,
                    err_is_abs,
                    t_exact,
                    t_approx,
                    speedup: t_exact / t_approx,
                    t_exact_fast,
                });
            }
        }
    }
    Ok(rows)
}

/// Exact and approximate cost as `n` grows, on seeded mixture instances.
pub fn scaling_probe(
    n_list: &[usize],
    epsilon: f64,
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<_> = n_list.iter().map(|&n| mixture_instance(&mut rng, n)).collect();
    run_bench(
        &instances,
        &[epsilon],
        &[k],
        BenchOptions {
            reps,
            time_fast: false,
        },
    )
}

/// Summary statistics over a set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub rows: usize,
    pub mean_abs_err: f64,
    pub max_err: f64,
    pub min_err: f64,
    pub median_speedup: f64,
    pub abs_err_rows: usize,
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let n = rows.len().max(1) as f64;
    let mut speedups: Vec<f64> = rows.iter().map(|r| r.speedup).collect();
    speedups.sort_by(f64::total_cmp);
    BenchSummary {
        rows: rows.len(),
        mean_abs_err: rows.iter().map(|r| r.err.abs()).sum::<f64>() / n,
        max_err: rows.iter().map(|r| r.err).fold(f64::NEG_INFINITY, f64::max),
        min_err: rows.iter().map(|r| r.err).fold(f64::INFINITY, f64::min),
        median_speedup: speedups.get(speedups.len() / 2).copied().unwrap_or(0.0),
        abs_err_rows: rows.iter().filter(|r| r.err_is_abs).count(),
    }
}

/// Two groups of `n / 2` scores from different two-component Beta mixtures.
pub fn mixture_instance<R: Rng>(rng: &mut R, n: usize) -> GroupedPredictions {
    let n0 = (n / 2).max(1);
    let n1 = (n - n0).max(1);
    let low = Beta::new(2.0, 5.0).expect("valid beta");
    let high = Beta::new(5.0, 2.0).expect("valid beta");
    let mut draw = |count: usize, p_high: f64| -> Vec<f64> {
        (0..count)
            .map(|_| {
                if rng.gen_bool(p_high) {
                    high.sample(rng)
                } else {
                    low.sample(rng)
                }
            })
            .collect()
    };
    let group0 = draw(n0, 0.35);
    let group1 = draw(n1, 0.55);
    GroupedPredictions::from_groups(group0, group1).expect("beta samples lie in [0, 1]")
}
