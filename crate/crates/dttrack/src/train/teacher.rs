//! The frozen teacher and the feature adapter that bridges mismatched
//! widths and token grids.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::autodiff::{DiffTensor, Param, ParamSet};
use crate::error::{Error, Result};
use crate::loss::LayerSelect;
use crate::model::{TrackerConfig, TrackerParams, TrackOutput};

/// A frozen, previously trained model that guides the student. Its parameter
/// bytes never change during a run; the adapter parameters are trainable and
/// owned by the student's run.
#[derive(Clone, Debug)]
pub struct TeacherHandle {
    pub config: TrackerConfig,
    pub params: TrackerParams,
    pub adapter: Option<Adapter>,
}

impl TeacherHandle {
    pub fn new(config: TrackerConfig, params: TrackerParams, adapter: Option<Adapter>) -> Self {
        TeacherHandle {
            config,
            params,
            adapter,
        }
    }

    pub fn digest(&self) -> u64 {
        self.params.set.digest()
    }
}

/// Per-selected-layer linear projection (teacher width to student width)
/// composed with a constant bilinear token-grid resampling when the grids
/// differ. Excluded from inference.
#[derive(Clone, Debug)]
pub struct Adapter {
    pub params: ParamSet,
    /// (student layer, teacher layer) pairs the projections serve.
    pub pairs: Vec<(usize, usize)>,
    /// Row-major [student_tokens, teacher_tokens] interpolation weights,
    /// None when the grids already match.
    resample: Option<Vec<f64>>,
    teacher_tokens: usize,
    student_tokens: usize,
    teacher_dim: usize,
    student_dim: usize,
}

impl Adapter {
    /// Builds an adapter when the teacher and student disagree in embedding
    /// width or search-token grid; returns None when they already align.
    pub fn new_if_needed(
        teacher: &TrackerConfig,
        student: &TrackerConfig,
        select: &LayerSelect,
        seed: u64,
    ) -> Result<Option<Adapter>> {
        let dims_differ = teacher.embed_dim != student.embed_dim;
        let grids_differ = teacher.grid() != student.grid();
        if !dims_differ && !grids_differ {
            return Ok(None);
        }
        let pairs = select.resolve(student.num_layers, teacher.num_layers)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut params = ParamSet::new();
        for (si, _ti) in &pairs {
            let limit = (6.0 / (teacher.embed_dim + student.embed_dim) as f64).sqrt();
            params.insert(
                format!("adapter.{si}.proj"),
                Param::uniform(&[teacher.embed_dim, student.embed_dim], limit, &mut rng),
            );
        }
        let resample = grids_differ.then(|| {
            resample_matrix(teacher.grid(), student.grid())
        });
        Ok(Some(Adapter {
            params,
            pairs,
            resample,
            teacher_tokens: teacher.search_tokens(),
            student_tokens: student.search_tokens(),
            teacher_dim: teacher.embed_dim,
            student_dim: student.embed_dim,
        }))
    }

    pub fn teacher_dim(&self) -> usize {
        self.teacher_dim
    }

    pub fn student_dim(&self) -> usize {
        self.student_dim
    }

    /// Maps one teacher feature map [teacher_tokens, teacher_dim] into the
    /// student's feature space using the projection registered for student
    /// layer `si`. `vars` holds the adapter parameters, mounted when they
    /// should train, constants otherwise.
    pub fn apply(
        &self,
        vars: &BTreeMap<String, DiffTensor>,
        teacher_feature: &DiffTensor,
        si: usize,
    ) -> Result<DiffTensor> {
        let name = format!("adapter.{si}.proj");
        let proj = vars
            .get(&name)
            .ok_or_else(|| Error::Contract(format!("missing adapter parameter `{name}`")))?;
        let projected = teacher_feature.matmul(proj)?;
        match &self.resample {
            None => Ok(projected),
            Some(weights) => {
                let r = DiffTensor::constant(
                    weights.clone(),
                    &[self.student_tokens, self.teacher_tokens],
                )?;
                r.matmul(&projected)
            }
        }
    }
}

/// Bilinear interpolation weights from a src x src token grid onto a
/// dst x dst one. Each output row sums to 1.
fn resample_matrix(src: usize, dst: usize) -> Vec<f64> {
    let mut out = vec![0.0; dst * dst * src * src];
    for oy in 0..dst {
        for ox in 0..dst {
            let row = oy * dst + ox;
            let sy = (oy as f64 + 0.5) * src as f64 / dst as f64 - 0.5;
            let sx = (ox as f64 + 0.5) * src as f64 / dst as f64 - 0.5;
            let y0 = sy.floor();
            let x0 = sx.floor();
            let fy = sy - y0;
            let fx = sx - x0;
            let clamp = |v: f64| (v.max(0.0) as usize).min(src - 1);
            let (y0i, y1i) = (clamp(y0), clamp(y0 + 1.0));
            let (x0i, x1i) = (clamp(x0), clamp(x0 + 1.0));
            let base = row * src * src;
            out[base + y0i * src + x0i] += (1.0 - fy) * (1.0 - fx);
            out[base + y0i * src + x1i] += (1.0 - fy) * fx;
            out[base + y1i * src + x0i] += fy * (1.0 - fx);
            out[base + y1i * src + x1i] += fy * fx;
        }
    }
    out
}

/// Bilinear plane resampling for detached score/offset/size maps.
pub fn resample_plane(src_data: &[f64], src: usize, dst: usize) -> Vec<f64> {
    let weights = resample_matrix(src, dst);
    let mut out = vec![0.0; dst * dst];
    for (row, slot) in out.iter_mut().enumerate() {
        let w = &weights[row * src * src..(row + 1) * src * src];
        *slot = w.iter().zip(src_data).map(|(a, b)| a * b).sum();
    }
    out
}

/// Re-expresses a reference output on a different grid so its maps are
/// shape-compatible with the student's. Maps are detached values; the decoded
/// box is already resolution-free and carries over unchanged.
pub fn resample_reference(out: &TrackOutput, target_grid: usize) -> Result<TrackOutput> {
    if out.grid == target_grid {
        return Ok(out.clone());
    }
    let s = out.grid;
    let score = resample_plane(out.score_map.data(), s, target_grid);
    let plane = target_grid * target_grid;
    let mut offset = Vec::with_capacity(2 * plane);
    let mut size = Vec::with_capacity(2 * plane);
    for ch in 0..2 {
        offset.extend(resample_plane(
            &out.offset_map.data()[ch * s * s..(ch + 1) * s * s],
            s,
            target_grid,
        ));
        size.extend(resample_plane(
            &out.size_map.data()[ch * s * s..(ch + 1) * s * s],
            s,
            target_grid,
        ));
    }
    Ok(TrackOutput {
        score_map: DiffTensor::constant(score, &[target_grid, target_grid])?,
        offset_map: DiffTensor::constant(offset, &[2, target_grid, target_grid])?,
        size_map: DiffTensor::constant(size, &[2, target_grid, target_grid])?,
        features: out.features.clone(),
        bbox: out.bbox,
        grid: target_grid,
    })
}
