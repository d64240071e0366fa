//! The command-line surface: data generation, training, stage plans,
//! evaluation, one-factor sweeps, and report merging.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::autodiff::{set_default_precision, Precision};
use crate::error::Result;

pub use commands::{
    cmd_eval, cmd_gen_data, cmd_plan_run, cmd_report, cmd_sweep, cmd_train, prepare_run_dir,
    run_training, SweepFactor, TrainArtifacts,
};
pub use config::{
    apply_override, echo_resolved, parse_config, typed_from_value, EvalSection, GenDataFile,
    TrainRunConfig,
};

/// Environment variable naming the default root for relative --out paths.
pub const OUT_ROOT_ENV: &str = "DTTRACK_OUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

fn parse_kv(raw: &str) -> std::result::Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got `{raw}`"))
}

#[derive(Parser, Debug)]
#[command(
    name = "dttrack",
    about = "Train, scale, and benchmark a tiny one-stream tracker on synthetic video"
)]
pub struct Cli {
    /// Overrides the run seed in the loaded config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (dataset generation, evaluation).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Numeric precision for the whole process.
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::F32)]
    pub precision: PrecisionArg,
    /// Allows reusing a non-empty run directory.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Builds synthetic datasets from a generation config.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dotted-path config overrides, applied last (key=value).
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
    },
    /// Trains one model (optionally against a frozen teacher checkpoint).
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
        /// Final mask ratio of the linear schedule.
        #[arg(long)]
        mask_end: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        lambda_align: Option<f64>,
    },
    /// Runs a multi-stage growth plan.
    PlanRun {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
    },
    /// Evaluates a checkpoint over benchmark suite directories.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long = "suite")]
        suites: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Hanning blend weight (1 = pure multiplicative penalty).
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Also writes per-threshold success curves.
        #[arg(long)]
        curves: bool,
    },
    /// Trains and evaluates once per value of exactly one factor.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        factor: SweepFactor,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
    },
    /// Merges prior run CSVs into one summary table.
    Report {
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_with_root(out: &Path) -> PathBuf {
    if out.is_absolute() {
        return out.to_path_buf();
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => Path::new(&root).join(out),
        _ => out.to_path_buf(),
    }
}

fn seed_overrides(seed: Option<u64>, key: &str) -> Vec<(String, String)> {
    seed.map(|s| vec![(key.to_string(), s.to_string())])
        .unwrap_or_default()
}

/// Executes one parsed invocation. On failure, a machine-readable
/// `error.json` is left in the run directory when one is known.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool already exists (tests call run() repeatedly).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    set_default_precision(match cli.precision {
        PrecisionArg::F32 => Precision::F32,
        PrecisionArg::F64 => Precision::F64,
    });

    let (out_dir, result) = dispatch(cli);
    if let (Some(out), Err(err)) = (&out_dir, &result) {
        let record = serde_json::json!({ "error": err.to_string() });
        let _ = fs::create_dir_all(out);
        let _ = fs::write(
            out.join("error.json"),
            serde_json::to_string_pretty(&record).expect("json serializes"),
        );
    }
    result
}

fn dispatch(cli: Cli) -> (Option<PathBuf>, Result<()>) {
    let force = cli.force;
    match cli.command {
        Command::GenData { config, out, set } => {
            // Dataset seeds live per entry in the config; --seed does not
            // apply here.
            let out = out_with_root(&out);
            let r = cmd_gen_data(&config, &out, &set, force);
            (Some(out), r)
        }
        Command::Train {
            config,
            out,
            mut set,
            mask_end,
            epochs,
            steps,
            batch,
            lr,
            lambda_align,
        } => {
            let out = out_with_root(&out);
            let sugar: [(&str, Option<String>); 6] = [
                ("train.mask_ratio.end", mask_end.map(|v| v.to_string())),
                ("train.total_epochs", epochs.map(|v| v.to_string())),
                ("train.steps_per_epoch", steps.map(|v| v.to_string())),
                ("train.batch_size", batch.map(|v| v.to_string())),
                ("train.base_lr", lr.map(|v| v.to_string())),
                ("train.lambda_align", lambda_align.map(|v| v.to_string())),
            ];
            for (key, value) in sugar {
                if let Some(value) = value {
                    set.push((key.to_string(), value));
                }
            }
            set.extend(seed_overrides(cli.seed, "train.seed"));
            let r = cmd_train(&config, &out, &set, force).map(|_| ());
            (Some(out), r)
        }
        Command::PlanRun { config, out, mut set } => {
            let out = out_with_root(&out);
            set.extend(seed_overrides(cli.seed, "seed"));
            let r = cmd_plan_run(&config, &out, &set, force);
            (Some(out), r)
        }
        Command::Eval {
            checkpoint,
            suites,
            out,
            gamma,
            curves,
        } => {
            let out = out_with_root(&out);
            let r = cmd_eval(&checkpoint, &suites, gamma, curves, &out, force);
            (Some(out), r)
        }
        Command::Sweep {
            config,
            out,
            factor,
            values,
            mut set,
        } => {
            let out = out_with_root(&out);
            set.extend(seed_overrides(cli.seed, "train.seed"));
            let r = cmd_sweep(&config, &out, factor, &values, &set, force);
            (Some(out), r)
        }
        Command::Report { runs, out } => {
            let out = out.map(|o| out_with_root(&o));
            let r = cmd_report(&runs, out.as_deref(), force);
            (out, r)
        }
    }
}

/// Entry point for the binary: parse, run, exit nonzero on failure.
pub fn main_impl() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            std::process::ExitCode::FAILURE
        }
    }
}
