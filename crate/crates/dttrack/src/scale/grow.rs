//! Turning the previous stage's checkpoint into a frozen teacher and a
//! freshly initialized, larger student.

use crate::error::{Error, Result};
use crate::model::TrackerParams;
use crate::train::{Adapter, TeacherHandle};
use crate::util::{split_seed, stream};

use super::checkpoint::Checkpoint;
use super::plan::StageSpec;

/// Wraps the previous checkpoint as a frozen teacher and initializes the new
/// student. An adapter is created exactly when widths or token grids differ;
/// the student always starts from fresh scaled-uniform values (the teacher
/// guides through the losses, not through weight copying).
pub fn grow(prev: &Checkpoint, spec: &StageSpec, seed: u64) -> Result<(TeacherHandle, TrackerParams)> {
    spec.tracker.validate()?;
    let t_cfg = prev.manifest.tracker;
    if spec.tracker.embed_dim < t_cfg.embed_dim
        || spec.tracker.num_layers < t_cfg.num_layers
        || spec.tracker.search_resolution < t_cfg.search_resolution
    {
        return Err(Error::Contract(format!(
            "student config must not shrink below its teacher: dim {} -> {}, layers {} -> {}, search {} -> {}",
            t_cfg.embed_dim,
            spec.tracker.embed_dim,
            t_cfg.num_layers,
            spec.tracker.num_layers,
            t_cfg.search_resolution,
            spec.tracker.search_resolution
        )));
    }

    let adapter = Adapter::new_if_needed(
        &t_cfg,
        &spec.tracker,
        &spec.train.feature_layers,
        split_seed(seed, &[stream::STAGE, 1]),
    )?;
    let teacher = TeacherHandle::new(t_cfg, prev.params.clone(), adapter);
    let student = TrackerParams::init(&spec.tracker, split_seed(seed, &[stream::INIT]));
    Ok((teacher, student))
}
