//! The supervised tracking loss: focal + weighted GIoU + weighted L1.

use serde::{Deserialize, Serialize};

use crate::autodiff::DiffTensor;
use crate::error::Result;
use crate::model::TrackOutput;

use super::boxes::{giou_loss_vs_const, l1_vs_const, DiffBox, NormBox};
use super::focal::focal_loss;
use super::target::TargetMaps;

/// Coefficients of the tracking loss terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub focal: f64,
    pub iou: f64,
    pub l1: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            focal: 1.0,
            iou: 2.0,
            l1: 5.0,
        }
    }
}

/// Reads one scalar entry out of a row-major map tensor.
/// `plane_len` is S*S; `channel` selects within a [C, S, S] stack.
fn map_entry(map: &DiffTensor, channel: usize, cell: usize, plane_len: usize) -> Result<DiffTensor> {
    map.reshape(&[map.numel()])?
        .slice(0, channel * plane_len + cell, 1)?
        .reshape(&[])
}

/// Assembles the differentiable box stored at one grid cell of the offset and
/// size maps: center = (cell + offset) / S, size read directly.
pub fn read_box_at_cell(
    offset_map: &DiffTensor,
    size_map: &DiffTensor,
    cell: (usize, usize),
    grid: usize,
) -> Result<DiffBox> {
    let (row, col) = cell;
    let idx = row * grid + col;
    let plane = grid * grid;
    let s = grid as f64;
    let ox = map_entry(offset_map, 0, idx, plane)?;
    let oy = map_entry(offset_map, 1, idx, plane)?;
    Ok(DiffBox {
        cx: ox.add_scalar(col as f64)?.scale(1.0 / s)?,
        cy: oy.add_scalar(row as f64)?.scale(1.0 / s)?,
        w: map_entry(size_map, 0, idx, plane)?,
        h: map_entry(size_map, 1, idx, plane)?,
    })
}

/// Ground-truth tracking loss:
/// focal(score, target) + iou_weight * (1 - GIoU) + l1_weight * L1,
/// with the box terms read at the ground-truth cell.
pub fn track_loss(
    pred: &TrackOutput,
    target: &TargetMaps,
    gt: NormBox,
    weights: &LossWeights,
) -> Result<DiffTensor> {
    let focal = focal_loss(&pred.score_map, target)?;
    let pred_box = read_box_at_cell(&pred.offset_map, &pred.size_map, target.cell, pred.grid)?;
    let giou = giou_loss_vs_const(&pred_box, gt)?;
    let l1 = l1_vs_const(&pred_box, gt)?;
    focal
        .scale(weights.focal)?
        .add(&giou.scale(weights.iou)?)?
        .add(&l1.scale(weights.l1)?)
}
