//! Output-to-output tracking loss and feature distance, the glue of both
//! teacher transfer and dual-branch alignment.

use serde::{Deserialize, Serialize};

use crate::autodiff::DiffTensor;
use crate::error::{Error, Result};
use crate::model::TrackOutput;

use super::boxes::{giou_loss_vs_const, l1_vs_const, NormBox};
use super::track::{read_box_at_cell, LossWeights};

/// Which recorded layers participate in feature comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LayerSelect {
    #[default]
    Last,
    All,
    Indices {
        indices: Vec<usize>,
    },
}

impl LayerSelect {
    /// Resolves to (student layer, reference layer) index pairs.
    pub fn resolve(&self, n_student: usize, n_reference: usize) -> Result<Vec<(usize, usize)>> {
        if n_student == 0 || n_reference == 0 {
            return Err(Error::Contract("feature lists must be non-empty".into()));
        }
        match self {
            LayerSelect::Last => Ok(vec![(n_student - 1, n_reference - 1)]),
            LayerSelect::All => {
                if n_student != n_reference {
                    return Err(Error::Contract(format!(
                        "layer selection `all` needs equal depths, got {n_student} vs {n_reference}"
                    )));
                }
                Ok((0..n_student).map(|i| (i, i)).collect())
            }
            LayerSelect::Indices { indices } => {
                for &i in indices {
                    if i >= n_student || i >= n_reference {
                        return Err(Error::Contract(format!(
                            "selected layer {i} out of range ({n_student} student, {n_reference} reference layers)"
                        )));
                    }
                }
                Ok(indices.iter().map(|&i| (i, i)).collect())
            }
        }
    }
}

/// Mean squared difference over all entries of each selected layer pair,
/// averaged over the selected layers. Reference features must already be
/// shape-compatible (adapted upstream when the models differ).
pub fn feature_l2(
    features: &[DiffTensor],
    reference: &[DiffTensor],
    select: &LayerSelect,
) -> Result<DiffTensor> {
    let pairs = select.resolve(features.len(), reference.len())?;
    let mut acc: Option<DiffTensor> = None;
    for (si, ri) in &pairs {
        let (a, b) = (&features[*si], &reference[*ri]);
        if a.shape() != b.shape() {
            return Err(Error::ShapeMismatch {
                op: "feature-l2",
                lhs: a.shape().to_vec(),
                rhs: b.shape().to_vec(),
            });
        }
        let d = a.sub(b)?;
        let mse = d.mul(&d)?.mean()?;
        acc = Some(match acc {
            None => mse,
            Some(prev) => prev.add(&mse)?,
        });
    }
    acc.expect("resolve returns at least one pair")
        .scale(1.0 / pairs.len() as f64)
}

/// Reads the box stored at one cell of plain (detached) maps, unclamped, so
/// it matches the differentiable read of the other side exactly.
fn raw_box_at_cell(offset: &[f64], size: &[f64], cell: (usize, usize), grid: usize) -> NormBox {
    let (row, col) = cell;
    let idx = row * grid + col;
    let plane = grid * grid;
    let s = grid as f64;
    NormBox {
        cx: (col as f64 + offset[idx]) / s,
        cy: (row as f64 + offset[plane + idx]) / s,
        w: size[idx],
        h: size[plane + idx],
    }
}

/// Tracking loss between two model outputs: binary cross-entropy treating the
/// reference score map as soft targets, plus weighted GIoU and L1 between the
/// boxes compared at the reference's peak cell.
///
/// With `detach_reference` (the default), the reference side is a constant:
/// no gradient flows back through it. The symmetric alternative keeps the
/// reference map differentiable and averages the box terms over both
/// detachment directions.
pub fn soft_track_loss(
    student: &TrackOutput,
    reference: &TrackOutput,
    weights: &LossWeights,
    detach_reference: bool,
) -> Result<DiffTensor> {
    if student.grid != reference.grid {
        return Err(Error::ShapeMismatch {
            op: "soft-track-loss",
            lhs: student.score_map.shape().to_vec(),
            rhs: reference.score_map.shape().to_vec(),
        });
    }

    let p = &student.score_map;
    let q = if detach_reference {
        reference.score_map.detach()
    } else {
        reference.score_map.clone()
    };
    let one_minus_p = p.scale(-1.0)?.add_scalar(1.0)?;
    let one_minus_q = q.scale(-1.0)?.add_scalar(1.0)?;
    let bce = q
        .mul(&p.ln()?)?
        .add(&one_minus_q.mul(&one_minus_p.ln()?)?)?
        .mean()?
        .scale(-1.0)?;

    // Both boxes are compared at the reference's argmax cell, reading raw
    // (unclamped) map values on both sides so identical outputs give exactly
    // zero box terms.
    let cell = crate::model::argmax_cell(reference.score_map.data(), reference.grid);
    let ref_box = raw_box_at_cell(
        reference.offset_map.data(),
        reference.size_map.data(),
        cell,
        reference.grid,
    );
    let student_box = read_box_at_cell(&student.offset_map, &student.size_map, cell, student.grid)?;
    let giou = giou_loss_vs_const(&student_box, ref_box)?;
    let l1 = l1_vs_const(&student_box, ref_box)?;
    let mut box_terms = giou.scale(weights.iou)?.add(&l1.scale(weights.l1)?)?;

    if !detach_reference {
        // Mirror direction: gradients also reach the reference maps.
        let s_cell = crate::model::argmax_cell(student.score_map.data(), student.grid);
        let student_fixed = raw_box_at_cell(
            student.offset_map.data(),
            student.size_map.data(),
            s_cell,
            student.grid,
        );
        let ref_diff_box =
            read_box_at_cell(&reference.offset_map, &reference.size_map, s_cell, reference.grid)?;
        let giou_r = giou_loss_vs_const(&ref_diff_box, student_fixed)?;
        let l1_r = l1_vs_const(&ref_diff_box, student_fixed)?;
        let mirrored = giou_r.scale(weights.iou)?.add(&l1_r.scale(weights.l1)?)?;
        box_terms = box_terms.add(&mirrored)?.scale(0.5)?;
    }

    bce.add(&box_terms)
}
