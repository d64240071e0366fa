//! Progressive scaling: stage plans, checkpoint lineage, and growth from a
//! previous stage's model.

mod checkpoint;
mod grow;
mod plan;
mod runner;

pub use checkpoint::{checkpoint_id, Checkpoint, CheckpointManifest, TensorIndexEntry};
pub use grow::grow;
pub use plan::{plan_stages, GrowthFactor, StagePlan, StageSpec, TeacherSource};
pub use runner::{run_plan, StageOutcome};

#[cfg(test)]
mod tests;
