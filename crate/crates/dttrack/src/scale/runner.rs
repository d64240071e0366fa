//! Executing a stage plan: train, evaluate, checkpoint, chain.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::model::TrackerParams;
use crate::scale::checkpoint::checkpoint_id;
use crate::train::{train, DTConfig};
use crate::util::{split_seed, stream};

use super::checkpoint::Checkpoint;
use super::grow::grow;
use super::plan::{plan_stages, StagePlan, TeacherSource};

/// Everything one stage produced.
#[derive(Debug)]
pub struct StageOutcome {
    pub checkpoint: Checkpoint,
    pub manifest_path: PathBuf,
    pub report: EvalReport,
}

/// Runs every stage in order: resolve the teacher, train the student on the
/// stage's dataset, evaluate on the plan's benchmark, persist the checkpoint
/// with its lineage and metrics. A failing stage aborts the plan; checkpoints
/// of completed stages are already on disk.
pub fn run_plan(plan: &StagePlan, out_dir: &Path) -> Result<Vec<StageOutcome>> {
    let plan = plan_stages(plan.clone())?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let eval_suites: Vec<(String, Dataset)> = plan
        .eval
        .iter()
        .map(|cfg| Ok((cfg.name.clone(), Dataset::generate(&cfg.name, &cfg.specs())?)))
        .collect::<Result<_>>()?;

    let mut outcomes: Vec<StageOutcome> = Vec::new();
    for (i, stage) in plan.stages.iter().enumerate() {
        let label = stage.label(i);
        let stage_seed = split_seed(plan.seed, &[stream::STAGE, i as u64]);
        let dt = DTConfig {
            seed: stage_seed,
            ..stage.train.clone()
        };

        let dataset = Dataset::generate(&stage.data.name, &stage.data.specs())?;
        let datasets = [dataset];

        let (teacher, init) = match stage.teacher_source(i) {
            TeacherSource::None => (
                None,
                TrackerParams::init(&stage.tracker, split_seed(stage_seed, &[stream::INIT])),
            ),
            TeacherSource::PreviousStage => {
                let prev = outcomes.last().ok_or_else(|| {
                    Error::PlanValidation(format!(
                        "stage {i} wants the previous stage as teacher but is first"
                    ))
                })?;
                let (t, s) = grow(&prev.checkpoint, stage, stage_seed)?;
                (Some(t), s)
            }
            TeacherSource::Checkpoint { id } => {
                let prev = outcomes
                    .iter()
                    .find(|o| o.checkpoint.id() == id)
                    .ok_or_else(|| {
                        Error::PlanValidation(format!(
                            "stage {i} references checkpoint `{id}` which this plan has not produced"
                        ))
                    })?;
                let (t, s) = grow(&prev.checkpoint, stage, stage_seed)?;
                (Some(t), s)
            }
        };

        let outcome = train(&stage.tracker, init, teacher.as_ref(), &datasets, &dt)?;
        outcome
            .log
            .write_csv(&out_dir.join(format!("{label}.loss.csv")))?;

        let id = checkpoint_id(&stage.tracker, &outcome.params, outcome.adapter.as_ref());
        let suite_refs: Vec<(String, &Dataset)> = eval_suites
            .iter()
            .map(|(name, d)| (name.clone(), d))
            .collect();
        let report = evaluate(&outcome.params, &stage.tracker, &suite_refs, &plan.infer, &id)?;
        report.write_csv(&out_dir.join(format!("{label}.eval.csv")))?;

        let ancestors = match stage.teacher_source(i) {
            TeacherSource::None => vec![],
            TeacherSource::PreviousStage => outcomes
                .last()
                .map(|o| o.checkpoint.manifest.lineage.clone())
                .unwrap_or_default(),
            TeacherSource::Checkpoint { id } => outcomes
                .iter()
                .find(|o| o.checkpoint.id() == id)
                .map(|o| o.checkpoint.manifest.lineage.clone())
                .unwrap_or_default(),
        };
        let checkpoint = Checkpoint::build(
            stage.tracker,
            dt,
            outcome.params,
            outcome.adapter,
            ancestors,
            datasets[0].manifest.spec_digest.clone(),
            Some(report.clone()),
        );
        let manifest_path = checkpoint.save(out_dir)?;
        outcomes.push(StageOutcome {
            checkpoint,
            manifest_path,
            report,
        });
    }

    let mut summary = String::from("stage,name,checkpoint,mean_auc\n");
    for (i, o) in outcomes.iter().enumerate() {
        summary.push_str(&format!(
            "{i},{},{},{}\n",
            plan.stages[i].label(i),
            o.checkpoint.id(),
            o.report.mean_auc
        ));
    }
    let summary_path = out_dir.join("stages.csv");
    fs::write(&summary_path, summary).map_err(|e| Error::io(summary_path.display().to_string(), e))?;

    Ok(outcomes)
}
