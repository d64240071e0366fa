//! Multi-stage growth plans and their validation.

use serde::{Deserialize, Serialize};

use crate::data::DataGenConfig;
use crate::error::{Error, Result};
use crate::eval::InferConfig;
use crate::model::TrackerConfig;
use crate::train::DTConfig;

/// Where a stage's teacher comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TeacherSource {
    None,
    PreviousStage,
    Checkpoint { id: String },
}

/// The axes a stage may enlarge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthFactor {
    Data,
    Model,
    Resolution,
}

/// One stage: the student architecture, its training data and recipe, the
/// teacher source, and which factors this stage declares it grows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub tracker: TrackerConfig,
    pub data: DataGenConfig,
    #[serde(default)]
    pub train: DTConfig,
    /// Defaults to none for the first stage and previous-stage afterwards.
    #[serde(default)]
    pub teacher: Option<TeacherSource>,
    #[serde(default)]
    pub grows: Vec<GrowthFactor>,
}

impl StageSpec {
    pub fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("stage{index}"))
    }

    pub fn teacher_source(&self, index: usize) -> TeacherSource {
        self.teacher.clone().unwrap_or(if index == 0 {
            TeacherSource::None
        } else {
            TeacherSource::PreviousStage
        })
    }
}

/// An ordered list of stages under one global seed, plus the benchmark every
/// stage is evaluated on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagePlan {
    pub seed: u64,
    /// Held-out benchmark suites (one dataset per entry).
    pub eval: Vec<DataGenConfig>,
    #[serde(default)]
    pub infer: InferConfig,
    pub stages: Vec<StageSpec>,
}

fn factor_error(stage: usize, factor: &str, detail: String) -> Error {
    Error::PlanValidation(format!("stage {stage}, factor {factor}: {detail}"))
}

/// Validates a plan: every stage parses, declared factors strictly grow,
/// undeclared factors stay fixed, and nothing ever shrinks.
pub fn plan_stages(plan: StagePlan) -> Result<StagePlan> {
    if plan.stages.is_empty() {
        return Err(Error::PlanValidation("a plan needs at least one stage".into()));
    }
    if plan.eval.is_empty() {
        return Err(Error::PlanValidation(
            "a plan needs at least one evaluation suite".into(),
        ));
    }
    for (i, stage) in plan.stages.iter().enumerate() {
        stage.tracker.validate()?;
        stage.train.validate()?;
        if i == 0 {
            continue;
        }
        let prev = &plan.stages[i - 1];

        let grows = |f: GrowthFactor| stage.grows.contains(&f);
        let data_now = stage.data.sequences;
        let data_prev = prev.data.sequences;
        if grows(GrowthFactor::Data) {
            if data_now <= data_prev {
                return Err(factor_error(
                    i,
                    "data",
                    format!("declared grown but sequences {data_prev} -> {data_now}"),
                ));
            }
        } else if data_now != data_prev {
            return Err(factor_error(
                i,
                "data",
                format!("changed ({data_prev} -> {data_now}) without being declared"),
            ));
        }

        let model_cmp = (
            stage.tracker.embed_dim.cmp(&prev.tracker.embed_dim),
            stage.tracker.num_layers.cmp(&prev.tracker.num_layers),
        );
        let model_shrinks = model_cmp.0 == std::cmp::Ordering::Less
            || model_cmp.1 == std::cmp::Ordering::Less;
        let model_grows_actual = model_cmp.0 == std::cmp::Ordering::Greater
            || model_cmp.1 == std::cmp::Ordering::Greater;
        if model_shrinks {
            return Err(factor_error(
                i,
                "model",
                format!(
                    "shrinks: dim {} -> {}, layers {} -> {}",
                    prev.tracker.embed_dim,
                    stage.tracker.embed_dim,
                    prev.tracker.num_layers,
                    stage.tracker.num_layers
                ),
            ));
        }
        if grows(GrowthFactor::Model) && !model_grows_actual {
            return Err(factor_error(i, "model", "declared grown but unchanged".into()));
        }
        if !grows(GrowthFactor::Model) && model_grows_actual {
            return Err(factor_error(i, "model", "grew without being declared".into()));
        }

        let res_now = stage.tracker.search_resolution;
        let res_prev = prev.tracker.search_resolution;
        if grows(GrowthFactor::Resolution) {
            if res_now <= res_prev {
                return Err(factor_error(
                    i,
                    "resolution",
                    format!("declared grown but {res_prev} -> {res_now}"),
                ));
            }
        } else if res_now != res_prev {
            return Err(factor_error(
                i,
                "resolution",
                format!("changed ({res_prev} -> {res_now}) without being declared"),
            ));
        }

        if let TeacherSource::None = stage.teacher_source(i) {
            // Permitted (a stage may restart from scratch), but the transfer
            // schedule must then be identically zero; train() enforces it.
        }
    }
    Ok(plan)
}
