//! Benchmark suites and the aggregated report.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{TrackerConfig, TrackerParams};

use super::metrics::{precision_metrics, success_auc};
use super::track::{track_sequence, InferConfig};

/// Metrics of one benchmark suite, averaged over its trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub trajectories: usize,
    pub auc: f64,
    pub precision: f64,
    pub norm_precision: f64,
}

/// Per-suite records plus the benchmark mean score (the arithmetic mean of
/// per-suite AUCs, with no trajectory-count weighting).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub suites: Vec<SuiteResult>,
    pub mean_auc: f64,
    pub checkpoint_id: String,
    pub wall_secs: f64,
}

/// Folds suite results into a report. The mean is the plain arithmetic mean
/// over suites.
pub fn bench_aggregate(
    suites: Vec<SuiteResult>,
    checkpoint_id: String,
    wall_secs: f64,
) -> Result<EvalReport> {
    if suites.is_empty() {
        return Err(Error::Contract("bench aggregate needs at least one suite".into()));
    }
    let mean_auc = suites.iter().map(|s| s.auc).sum::<f64>() / suites.len() as f64;
    Ok(EvalReport {
        suites,
        mean_auc,
        checkpoint_id,
        wall_secs,
    })
}

/// Runs the tracker over every sequence of every suite (sequences in
/// parallel) and aggregates. Metrics are averaged per trajectory, then over
/// the suite.
pub fn evaluate(
    params: &TrackerParams,
    cfg: &TrackerConfig,
    suites: &[(String, &Dataset)],
    infer: &InferConfig,
    checkpoint_id: &str,
) -> Result<EvalReport> {
    let start = Instant::now();
    let mut results = Vec::with_capacity(suites.len());
    for (name, dataset) in suites {
        let per_traj: Vec<(f64, f64, f64)> = dataset
            .sequences
            .par_iter()
            .map(|seq| {
                let preds = track_sequence(params, cfg, seq, infer)?;
                let auc = success_auc(&preds, &seq.boxes, &seq.visible)?;
                let (p, np) = precision_metrics(&preds, &seq.boxes, &seq.visible, seq.canvas)?;
                Ok((auc, p, np))
            })
            .collect::<Result<_>>()?;
        if per_traj.is_empty() {
            return Err(Error::UndefinedMetric(format!("suite `{name}` is empty")));
        }
        let n = per_traj.len() as f64;
        results.push(SuiteResult {
            suite: name.clone(),
            trajectories: per_traj.len(),
            auc: per_traj.iter().map(|r| r.0).sum::<f64>() / n,
            precision: per_traj.iter().map(|r| r.1).sum::<f64>() / n,
            norm_precision: per_traj.iter().map(|r| r.2).sum::<f64>() / n,
        });
    }
    bench_aggregate(results, checkpoint_id.to_string(), start.elapsed().as_secs_f64())
}

impl EvalReport {
    /// CSV: `suite,trajectories,auc,precision,norm_precision` rows plus a
    /// final mean row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,trajectories,auc,precision,norm_precision\n");
        for s in &self.suites {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.suite, s.trajectories, s.auc, s.precision, s.norm_precision
            ));
        }
        let n = self.suites.len() as f64;
        let trajs: usize = self.suites.iter().map(|s| s.trajectories).sum();
        out.push_str(&format!(
            "mean,{},{},{},{}\n",
            trajs,
            self.mean_auc,
            self.suites.iter().map(|s| s.precision).sum::<f64>() / n,
            self.suites.iter().map(|s| s.norm_precision).sum::<f64>() / n,
        ));
        out
    }
}
