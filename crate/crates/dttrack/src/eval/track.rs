//! Sequence-level inference: crop, forward, penalize, decode, repeat.

use serde::{Deserialize, Serialize};

use crate::data::{box_to_canvas, crop_at, CropWindow, Sequence};
use crate::error::Result;
use crate::loss::NormBox;
use crate::model::{argmax_cell, decode_box, forward, TrackerConfig, TrackerParams};

use super::window::{penalize, HannWindow};

/// Inference-time settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferConfig {
    /// Blend weight of the Hanning penalty; 1 is pure multiplicative.
    pub gamma: f64,
    pub template_factor: f64,
    pub search_factor: f64,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            gamma: 1.0,
            template_factor: 2.0,
            search_factor: 4.0,
        }
    }
}

/// Tracks one sequence: the template is cropped once from frame 0 at the
/// given ground truth, every later search crop recenters on the previous
/// prediction, and the Hanning prior reweights the score map before decoding.
/// A prediction is emitted for every frame (frame 0 echoes the init box);
/// the tracker never re-detects.
pub fn track_sequence(
    params: &TrackerParams,
    cfg: &TrackerConfig,
    seq: &Sequence,
    infer: &InferConfig,
) -> Result<Vec<NormBox>> {
    let vars = params.set.as_constants();
    let window = HannWindow::new(cfg.grid());

    let init = seq.boxes[0];
    let template_window = CropWindow::around(&init, seq.canvas, infer.template_factor);
    let template = crop_at(
        &seq.frames[0],
        seq.canvas,
        &template_window,
        cfg.template_resolution,
    );

    let mut preds = Vec::with_capacity(seq.len());
    preds.push(init);
    let mut prev = init;

    for t in 1..seq.len() {
        let search_window = CropWindow::around(&prev, seq.canvas, infer.search_factor);
        let search = crop_at(&seq.frames[t], seq.canvas, &search_window, cfg.search_resolution);
        let out = forward(&vars, cfg, &template, &search, None, None)?;

        let penalized = penalize(out.score_map.data(), &window, infer.gamma);
        let cell = argmax_cell(&penalized, cfg.grid());
        let crop_box = decode_box(
            &penalized,
            out.offset_map.data(),
            out.size_map.data(),
            cfg.grid(),
            Some(cell),
        );
        let pred = box_to_canvas(&crop_box, &search_window, seq.canvas).clamped();
        preds.push(pred);
        prev = pred;
    }
    Ok(preds)
}
