use std::io::Write;
use std::path::{Path, PathBuf};

use mcdp_bench::{mixture_instance, run_bench, summarize, BenchOptions, CSV_HEADER};
use mcdp_core::difftrain::{
    self, average_precision, synth_dataset, train_with_validation, Optimizer, Regularizer, TrainConfig,
};
use mcdp_core::{evaluate, Algorithm, EvalOptions, GroupedPredictions, MetricReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::{read_predictions, read_training, write_file, write_training};
use crate::{AlgoArg, CliError, OptArg, RegArg};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(usage(format!("--{name} {v} is outside [0, 1]")))
    }
}

fn stdout_write(text: &str) -> Result<(), CliError> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

fn algo_label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Exact => "exact",
        Algorithm::Approximate => "approx",
        Algorithm::ExactFast => "fast",
    }
}

/// Human-readable report, every value scaled ×100.
pub fn format_table(report: &MetricReport) -> String {
    let mut out = String::new();
    let mut row = |name: String, v: f64| out.push_str(&format!("{name:<24}{:>8.2}\n", 100.0 * v));
    row("ΔDP_mean".into(), report.delta_dp_mean);
    row(format!("ΔDP@{}", report.threshold), report.delta_dp_threshold);
    row("ABCC".into(), report.abcc);
    for m in &report.mcdp {
        let k = m.k.map(|k| format!(" K={k}")).unwrap_or_default();
        row(format!("MCDP({}) {}{k}", m.epsilon, algo_label(m.algo)), m.value);
    }
    out
}

pub fn eval(input: &Path, epsilons: &[f64], algo: AlgoArg, k: usize, threshold: f64, json: bool) -> Result<(), CliError> {
    if epsilons.is_empty() {
        return Err(usage("--epsilon needs at least one value"));
    }
    for &e in epsilons {
        check_unit("epsilon", e)?;
        if algo == AlgoArg::Approx && e == 0.0 {
            return Err(usage("--algo approx needs every --epsilon > 0"));
        }
    }
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    check_unit("threshold", threshold)?;

    let gp = read_predictions(input)?;
    let opts = EvalOptions {
        epsilons: epsilons.to_vec(),
        algorithm: match algo {
            AlgoArg::Exact => Algorithm::Exact,
            AlgoArg::Approx => Algorithm::Approximate,
            AlgoArg::Fast => Algorithm::ExactFast,
        },
        k,
        threshold,
    };
    let report = evaluate(&gp, &opts).map_err(|e| usage(e.to_string()))?;
    if json {
        stdout_write(&(to_json(&report) + "\n"))
    } else {
        stdout_write(&format_table(&report))
    }
}

/// Sample points for curve output: breakpoints plus a grid of pitch `step`.
pub fn curve_points(gp: &GroupedPredictions, step: f64) -> Vec<f64> {
    let mut ys: Vec<f64> = gp.delta_curve().breakpoints().to_vec();
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() < 1e-9 {
        // exact k/m avoids drift like 3 × 0.1 = 0.30000000000000004
        let m = m as usize;
        ys.extend((0..=m).map(|k| k as f64 / m as f64));
    } else {
        ys.extend((0..).map(|k| k as f64 * step).take_while(|&y| y < 1.0));
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    ys
}

pub fn curves(input: &Path, step: f64) -> Result<(), CliError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(usage(format!("--step {step} must lie in (0, 1]")));
    }
    let gp = read_predictions(input)?;
    let (e0, e1) = gp.ecdfs();
    let mut out = String::from("y,F0,F1,deltaF\n");
    for y in curve_points(&gp, step) {
        let (f0, f1) = (e0.eval(y), e1.eval(y));
        out.push_str(&format!("{y},{f0},{f1},{}\n", (f0 - f1).abs()));
    }
    stdout_write(&out)
}

pub fn bench(
    sizes: &[usize],
    epsilons: &[f64],
    ks: &[usize],
    reps: usize,
    seed: u64,
    time_fast: bool,
    summary: Option<&Path>,
) -> Result<(), CliError> {
    if sizes.is_empty() || sizes.iter().any(|&n| n < 2) {
        return Err(usage("--sizes must list sample counts of at least 2"));
    }
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(usage("--epsilons must lie in (0, 1]"));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(usage("--ks must be positive integers"));
    }
    if reps < 3 {
        return Err(usage("--reps must be at least 3"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<_> = sizes.iter().map(|&n| mixture_instance(&mut rng, n)).collect();
    let rows = run_bench(&instances, epsilons, ks, BenchOptions { reps, time_fast })
        .map_err(|e| usage(e.to_string()))?;

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    stdout_write(&csv)?;
    let json = to_json(&summarize(&rows)) + "\n";
    match summary {
        Some(path) => write_file(path, json.as_bytes()),
        None => {
            eprint!("{json}");
            Ok(())
        }
    }
}

pub struct TrainArgs {
    pub lambda: f64,
    pub tau: f64,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub reg: RegArg,
    pub optimizer: OptArg,
    pub ystar_grid: usize,
    pub holdout: f64,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn train(data_path: &Path, args: TrainArgs, out: &Path) -> Result<(), CliError> {
    let cfg = TrainConfig {
        lambda: args.lambda,
        tau: args.tau,
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        seed: args.seed,
        regularizer: match args.reg {
            RegArg::None => Regularizer::None,
            RegArg::Dp => Regularizer::Dp,
            RegArg::Abcc => Regularizer::Abcc,
            RegArg::Mcdp => Regularizer::Mcdp,
        },
        ystar_grid: args.ystar_grid,
        optimizer: match args.optimizer {
            OptArg::Sgd => Optimizer::Sgd,
            OptArg::Adam => Optimizer::Adam,
        },
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if !(args.holdout > 0.0 && args.holdout < 1.0) {
        return Err(usage(format!("--holdout {} must lie in (0, 1)", args.holdout)));
    }
    if args.reg == RegArg::None && args.lambda != 0.0 {
        eprintln!("mcdp: warning: --lambda {} is ignored with --reg none", args.lambda);
    }

    let data = read_training(data_path)?;
    let (train_set, held_out) = data.split(1.0 - args.holdout);
    if !train_set.has_both_groups() || !held_out.has_both_groups() {
        return Err(CliError::Schema(
            "both groups must appear in the training and held-out parts".into(),
        ));
    }
    let (model, history) = train_with_validation(&train_set, &held_out, &cfg).map_err(|e| usage(e.to_string()))?;

    let mut jsonl = String::new();
    for rec in &history.records {
        jsonl.push_str(&serde_json::to_string(rec).expect("serializable record"));
        jsonl.push('\n');
    }
    write_file(&with_suffix(out, ".model.json"), (to_json(&model) + "\n").as_bytes())?;
    write_file(&with_suffix(out, ".history.jsonl"), jsonl.as_bytes())?;

    let preds = model.predict_all(&held_out);
    let gp = GroupedPredictions::new(&preds, held_out.groups(), Some(held_out.labels()))
        .map_err(|e| CliError::Io(e.to_string()))?;
    let report = evaluate(
        &gp,
        &EvalOptions {
            algorithm: Algorithm::ExactFast,
            ..EvalOptions::default()
        },
    )
    .map_err(|e| CliError::Io(e.to_string()))?;
    let summary = serde_json::json!({
        "held_out": report,
        "average_precision": average_precision(&preds, held_out.labels()),
    });
    stdout_write(&(to_json(&summary) + "\n"))
}

pub fn synth(n: usize, bias: f64, seed: u64, out: &Path) -> Result<(), CliError> {
    let data: difftrain::Dataset = synth_dataset(seed, n, bias).map_err(|e| usage(e.to_string()))?;
    write_training(out, &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_points_merge_grid_and_breakpoints() {
        let gp = GroupedPredictions::new(&[0.1, 0.3, 0.4, 0.8], &[0, 1, 0, 1], None).unwrap();
        assert_eq!(
            curve_points(&gp, 0.25),
            vec![0.0, 0.1, 0.25, 0.3, 0.4, 0.5, 0.75, 0.8, 1.0]
        );
        let pts = curve_points(&gp, 0.1);
        assert_eq!(pts.len(), 11);
        assert!(pts.contains(&0.3));
    }

    #[test]
    fn table_scales_by_hundred() {
        let gp = GroupedPredictions::new(&[0.1, 0.3, 0.4, 0.8], &[0, 1, 0, 1], None).unwrap();
        let report = evaluate(&gp, &EvalOptions::default()).unwrap();
        let t = format_table(&report);
        assert!(t.contains("ΔDP_mean"));
        assert!(t.lines().any(|l| l.starts_with("ABCC") && l.ends_with("30.00")));
        assert!(t.lines().any(|l| l.starts_with("MCDP(0) exact") && l.ends_with("50.00")));
    }
}
