//! The command implementations behind the thin binary.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::{build_dataset, load_dataset, Dataset};
use crate::error::{Error, Result};
use crate::eval::{evaluate, success_curve, track_sequence, InferConfig};
use crate::model::TrackerParams;
use crate::scale::{checkpoint_id, run_plan, Checkpoint, StagePlan};
use crate::train::{train, Adapter, TeacherHandle};
use crate::util::{split_seed, stream};

use super::config::{echo_resolved, parse_config, EvalSection, GenDataFile, TrainRunConfig};

/// Creates the run directory, refusing to reuse a non-empty one unless
/// forced. Every run directory belongs to exactly one invocation.
pub fn prepare_run_dir(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        let non_empty = fs::read_dir(out)
            .map_err(|e| Error::io(out.display().to_string(), e))?
            .next()
            .is_some();
        if non_empty && !force {
            return Err(Error::Contract(format!(
                "run directory {} already exists and is not empty (pass --force to reuse)",
                out.display()
            )));
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))
}

/// Builds every dataset listed in the config file under `out/<name>/`.
pub fn cmd_gen_data(
    config: &Path,
    out: &Path,
    overrides: &[(String, String)],
    force: bool,
) -> Result<()> {
    let cfg: GenDataFile = parse_config(config, overrides)?;
    prepare_run_dir(out, force)?;
    echo_resolved(&cfg, out)?;
    for dataset in &cfg.datasets {
        let dir = out.join(&dataset.name);
        let manifest = build_dataset(&dataset.name, &dataset.specs(), &dir)?;
        println!(
            "dataset {}: {} sequences -> {}",
            manifest.name,
            manifest.files.len(),
            dir.display()
        );
    }
    Ok(())
}

fn resolve_datasets(cfg: &TrainRunConfig) -> Result<Vec<Dataset>> {
    let mut datasets = Vec::new();
    for gen_cfg in &cfg.data {
        datasets.push(Dataset::generate(&gen_cfg.name, &gen_cfg.specs())?);
    }
    for dir in &cfg.data_dirs {
        datasets.push(load_dataset(dir)?);
    }
    if datasets.is_empty() {
        return Err(Error::Config(
            "training config lists no datasets (`data` or `data_dirs`)".into(),
        ));
    }
    Ok(datasets)
}

fn resolve_suites(section: &EvalSection) -> Result<Vec<(String, Dataset)>> {
    let mut suites = Vec::new();
    for gen_cfg in &section.suites {
        suites.push((
            gen_cfg.name.clone(),
            Dataset::generate(&gen_cfg.name, &gen_cfg.specs())?,
        ));
    }
    for dir in &section.suite_dirs {
        let d = load_dataset(dir)?;
        suites.push((d.manifest.name.clone(), d));
    }
    if suites.is_empty() {
        return Err(Error::Config("eval section lists no suites".into()));
    }
    Ok(suites)
}

/// What `train` leaves behind, for callers that chain runs (sweeps, tests).
pub struct TrainArtifacts {
    pub checkpoint_id: String,
    pub manifest_path: PathBuf,
    pub mean_auc: Option<f64>,
}

/// Trains one model per the config: optional frozen teacher, loss CSV,
/// checkpoint, and optional benchmark evaluation.
pub fn cmd_train(
    config: &Path,
    out: &Path,
    overrides: &[(String, String)],
    force: bool,
) -> Result<TrainArtifacts> {
    let cfg: TrainRunConfig = parse_config(config, overrides)?;
    prepare_run_dir(out, force)?;
    echo_resolved(&cfg, out)?;
    run_training(&cfg, out)
}

/// The training flow shared by `train` and `sweep`.
pub fn run_training(cfg: &TrainRunConfig, out: &Path) -> Result<TrainArtifacts> {
    cfg.tracker.validate()?;
    cfg.train.validate()?;
    let datasets = resolve_datasets(cfg)?;

    let teacher = match &cfg.teacher {
        None => None,
        Some(path) => {
            let ckpt = Checkpoint::load(path)?;
            let adapter = Adapter::new_if_needed(
                &ckpt.manifest.tracker,
                &cfg.tracker,
                &cfg.train.feature_layers,
                split_seed(cfg.train.seed, &[stream::STAGE, 1]),
            )?;
            Some((
                TeacherHandle::new(ckpt.manifest.tracker, ckpt.params.clone(), adapter),
                ckpt.manifest.lineage.clone(),
            ))
        }
    };
    let ancestors = teacher.as_ref().map(|(_, l)| l.clone()).unwrap_or_default();

    let init = TrackerParams::init(&cfg.tracker, split_seed(cfg.train.seed, &[stream::INIT]));
    let outcome = train(
        &cfg.tracker,
        init,
        teacher.as_ref().map(|(t, _)| t),
        &datasets,
        &cfg.train,
    )?;
    outcome.log.write_csv(&out.join("loss.csv"))?;

    let id = checkpoint_id(&cfg.tracker, &outcome.params, outcome.adapter.as_ref());
    let mut mean_auc = None;
    let report = match &cfg.eval {
        None => None,
        Some(section) => {
            let suites = resolve_suites(section)?;
            let refs: Vec<(String, &Dataset)> =
                suites.iter().map(|(n, d)| (n.clone(), d)).collect();
            let report = evaluate(&outcome.params, &cfg.tracker, &refs, &section.infer, &id)?;
            report.write_csv(&out.join("eval.csv"))?;
            mean_auc = Some(report.mean_auc);
            Some(report)
        }
    };

    let dataset_digest = datasets
        .iter()
        .map(|d| d.manifest.spec_digest.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let checkpoint = Checkpoint::build(
        cfg.tracker,
        cfg.train.clone(),
        outcome.params,
        outcome.adapter,
        ancestors,
        dataset_digest,
        report,
    );
    let manifest_path = checkpoint.save(out)?;
    println!(
        "checkpoint {} -> {}{}",
        checkpoint.id(),
        manifest_path.display(),
        mean_auc
            .map(|a| format!(" (mean AUC {a:.4})"))
            .unwrap_or_default()
    );
    Ok(TrainArtifacts {
        checkpoint_id: checkpoint.manifest.id.clone(),
        manifest_path,
        mean_auc,
    })
}

/// Executes a stage plan file end to end.
pub fn cmd_plan_run(
    config: &Path,
    out: &Path,
    overrides: &[(String, String)],
    force: bool,
) -> Result<()> {
    let plan: StagePlan = parse_config(config, overrides)?;
    prepare_run_dir(out, force)?;
    echo_resolved(&plan, out)?;
    let outcomes = run_plan(&plan, out)?;
    for (i, o) in outcomes.iter().enumerate() {
        println!(
            "stage {i}: checkpoint {} mean AUC {:.4} (lineage depth {})",
            o.checkpoint.id(),
            o.report.mean_auc,
            o.checkpoint.manifest.lineage.len()
        );
    }
    Ok(())
}

/// Evaluates a checkpoint over suite directories.
pub fn cmd_eval(
    checkpoint: &Path,
    suite_dirs: &[PathBuf],
    gamma: f64,
    curves: bool,
    out: &Path,
    force: bool,
) -> Result<()> {
    if suite_dirs.is_empty() {
        return Err(Error::Config("eval needs at least one --suite directory".into()));
    }
    prepare_run_dir(out, force)?;
    let ckpt = Checkpoint::load(checkpoint)?;
    let suites: Vec<(String, Dataset)> = suite_dirs
        .iter()
        .map(|dir| {
            let d = load_dataset(dir)?;
            Ok((d.manifest.name.clone(), d))
        })
        .collect::<Result<_>>()?;
    let refs: Vec<(String, &Dataset)> = suites.iter().map(|(n, d)| (n.clone(), d)).collect();
    let infer = InferConfig {
        gamma,
        ..InferConfig::default()
    };
    echo_resolved(
        &serde_json::json!({
            "checkpoint": checkpoint.display().to_string(),
            "suites": suite_dirs.iter().map(|d| d.display().to_string()).collect::<Vec<_>>(),
            "infer": infer,
        }),
        out,
    )?;
    let report = evaluate(&ckpt.params, &ckpt.manifest.tracker, &refs, &infer, ckpt.id())?;
    report.write_csv(&out.join("eval.csv"))?;
    print!("{}", report.to_csv());

    if curves {
        let mut csv = String::from("suite,threshold,success\n");
        for (name, dataset) in &suites {
            let mut sums = vec![0.0; crate::eval::IOU_THRESHOLD_COUNT];
            for seq in &dataset.sequences {
                let preds = track_sequence(&ckpt.params, &ckpt.manifest.tracker, seq, &infer)?;
                for (i, (_, frac)) in success_curve(&preds, &seq.boxes, &seq.visible)?
                    .into_iter()
                    .enumerate()
                {
                    sums[i] += frac;
                }
            }
            for (i, total) in sums.iter().enumerate() {
                let theta = i as f64 / (crate::eval::IOU_THRESHOLD_COUNT - 1) as f64;
                csv.push_str(&format!(
                    "{name},{theta},{}\n",
                    total / dataset.sequences.len() as f64
                ));
            }
        }
        let path = out.join("curves.csv");
        fs::write(&path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}

/// The factor a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepFactor {
    Layers,
    Data,
    Resolution,
}

/// Runs the base config once per value of exactly one factor and writes a
/// combined trend CSV. Member runs share the same seed so nothing but the
/// swept factor varies.
pub fn cmd_sweep(
    config: &Path,
    out: &Path,
    factor: SweepFactor,
    values: &[usize],
    overrides: &[(String, String)],
    force: bool,
) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one --values entry".into()));
    }
    let base: TrainRunConfig = parse_config(config, overrides)?;
    if base.eval.is_none() {
        return Err(Error::Config(
            "sweep config needs an `eval` section to measure the trend".into(),
        ));
    }
    prepare_run_dir(out, force)?;
    echo_resolved(&base, out)?;

    let mut trend = String::from("factor,value,checkpoint,mean_auc\n");
    for &value in values {
        let mut cfg = base.clone();
        let label = match factor {
            SweepFactor::Layers => {
                cfg.tracker.num_layers = value;
                "layers"
            }
            SweepFactor::Data => {
                if cfg.data.is_empty() {
                    return Err(Error::Config(
                        "sweeping data volume requires inline `data` generation configs".into(),
                    ));
                }
                for d in cfg.data.iter_mut() {
                    d.sequences = value;
                }
                "data"
            }
            SweepFactor::Resolution => {
                cfg.tracker.search_resolution = value;
                cfg.tracker.template_resolution = value / 2;
                "resolution"
            }
        };
        cfg.tracker.validate()?;
        let run_dir = out.join(format!("{label}-{value}"));
        prepare_run_dir(&run_dir, force)?;
        echo_resolved(&cfg, &run_dir)?;
        let artifacts = run_training(&cfg, &run_dir)?;
        let auc = artifacts.mean_auc.expect("eval section checked above");
        println!("{label} = {value}: mean AUC {auc:.4}");
        trend.push_str(&format!(
            "{label},{value},{},{auc}\n",
            artifacts.checkpoint_id
        ));
    }
    let path = out.join("trend.csv");
    fs::write(&path, trend).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Merges prior run CSVs into one human-readable summary.
pub fn cmd_report(runs: &[PathBuf], out: Option<&Path>, force: bool) -> Result<()> {
    if runs.is_empty() {
        return Err(Error::Config("report needs at least one --run directory".into()));
    }
    let mut lines: Vec<(String, String)> = Vec::new();
    for run in runs {
        let run_name = run
            .file_name()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| run.display().to_string());
        for file in ["eval.csv", "trend.csv", "stages.csv"] {
            let path = run.join(file);
            if !path.exists() {
                continue;
            }
            let text =
                fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
            for row in text.lines().skip(1).filter(|l| !l.is_empty()) {
                lines.push((format!("{run_name}/{file}"), row.to_string()));
            }
        }
    }
    if lines.is_empty() {
        return Err(Error::Config(
            "no eval.csv, trend.csv, or stages.csv found under the given runs".into(),
        ));
    }

    let width = lines.iter().map(|(s, _)| s.len()).max().unwrap_or(8);
    println!("{:width$}  {}", "source", "record");
    for (source, row) in &lines {
        println!("{source:width$}  {row}");
    }
    if let Some(out) = out {
        prepare_run_dir(out, force)?;
        let mut csv = String::from("source,record\n");
        for (source, row) in &lines {
            csv.push_str(&format!("{source},{row}\n"));
        }
        let path = out.join("report.csv");
        fs::write(&path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}
