//! `mcdp`: fairness metrics, plot data, benchmarks and fair training from
//! the command line.
//!
//! Exit codes: 0 success, 2 malformed input file, 3 invalid flags, 1 I/O.

mod commands;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Input file violates its CSV schema.
    Schema(String),
    /// Flag value out of range or inconsistent.
    Usage(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid input: {m}"),
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Usage(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mcdp", version, about = "Demographic-parity violation metrics (ΔDP, ABCC, MCDP)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Exact,
    Approx,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegArg {
    None,
    Dp,
    Abcc,
    Mcdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptArg {
    Sgd,
    Adam,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute ΔDP, ABCC and MCDP(ε) for a `prediction,group[,label]` CSV.
    Eval {
        input: PathBuf,
        /// Comma-separated neighbourhood sizes.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        epsilon: Vec<f64>,
        #[arg(long, value_enum, default_value_t = AlgoArg::Exact)]
        algo: AlgoArg,
        /// Sampling frequency for `--algo approx`.
        #[arg(long, default_value_t = 32)]
        k: usize,
        /// Positive-decision threshold for the thresholded ΔDP.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Raw values as JSON.
        #[arg(long, conflicts_with = "table")]
        json: bool,
        /// Values ×100 with two decimals (default).
        #[arg(long)]
        table: bool,
    },
    /// Emit `y,F0,F1,deltaF` at every breakpoint and on a uniform grid.
    Curves {
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Time exact vs approximate MCDP on seeded synthetic instances.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        epsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,8,32")]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also time the sliding-window exact route.
        #[arg(long)]
        time_fast: bool,
        /// Write the JSON summary here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Train a fairness-regularized logistic classifier on a `label,group,f1,...` CSV.
    Train {
        data: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 20.0)]
        tau: f64,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 256)]
        batch: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RegArg::None)]
        reg: RegArg,
        #[arg(long, value_enum, default_value_t = OptArg::Sgd)]
        optimizer: OptArg,
        #[arg(long, default_value_t = 101)]
        ystar_grid: usize,
        /// Trailing fraction of rows held out for the final report.
        #[arg(long, default_value_t = 0.25)]
        holdout: f64,
        /// Output prefix: writes `<out>.model.json` and `<out>.history.jsonl`.
        #[arg(long, default_value = "model")]
        out: PathBuf,
    },
    /// Write a synthetic `label,group,f1,f2` training CSV.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bias: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval {
            input,
            epsilon,
            algo,
            k,
            threshold,
            json,
            table: _,
        } => commands::eval(&input, &epsilon, algo, k, threshold, json),
        Command::Curves { input, step } => commands::curves(&input, step),
        Command::Bench {
            sizes,
            epsilons,
            ks,
            reps,
            seed,
            time_fast,
            summary,
        } => commands::bench(&sizes, &epsilons, &ks, reps, seed, time_fast, summary.as_deref()),
        Command::Train {
            data,
            lambda,
            tau,
            epochs,
            batch,
            lr,
            seed,
            reg,
            optimizer,
            ystar_grid,
            holdout,
            out,
        } => commands::train(
            &data,
            commands::TrainArgs {
                lambda,
                tau,
                epochs,
                batch,
                lr,
                seed,
                reg,
                optimizer,
                ystar_grid,
                holdout,
            },
            &out,
        ),
        Command::Synth { n, bias, seed, out } => commands::synth(n, bias, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mcdp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
