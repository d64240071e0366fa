//! Loss assembly: dual-branch forward, teacher transfer, branch alignment,
//! and the weighted total.

use std::collections::BTreeMap;

use crate::autodiff::DiffTensor;
use crate::error::{Error, Result};
use crate::loss::{
    feature_l2, soft_track_loss, track_loss, LayerSelect, LossWeights, NormBox, TargetMaps,
};
use crate::data::Image;
use crate::model::{forward, TrackOutput, TrackerConfig};

use super::mask::MaskSpec;
use super::teacher::Adapter;

type Vars = BTreeMap<String, DiffTensor>;

/// Runs the clean and masked branches through shared weights. An empty mask
/// makes the branches bitwise identical.
pub fn dual_branch_forward(
    vars: &Vars,
    cfg: &TrackerConfig,
    template: &Image,
    search: &Image,
    mask: &MaskSpec,
    template_mask: Option<&MaskSpec>,
) -> Result<(TrackOutput, TrackOutput)> {
    if mask.len() != cfg.search_tokens() {
        return Err(Error::Contract(format!(
            "mask sized for {} patches but the search image has {}",
            mask.len(),
            cfg.search_tokens()
        )));
    }
    let clean = forward(vars, cfg, template, search, None, None)?;
    let masked = forward(
        vars,
        cfg,
        template,
        search,
        Some(mask.pattern()),
        template_mask.map(|m| m.pattern()),
    )?;
    Ok((clean, masked))
}

fn detached_output(out: &TrackOutput) -> TrackOutput {
    TrackOutput {
        score_map: out.score_map.detach(),
        offset_map: out.offset_map.detach(),
        size_map: out.size_map.detach(),
        features: out.features.iter().map(DiffTensor::detach).collect(),
        bbox: out.bbox,
        grid: out.grid,
    }
}

/// Knowledge-transfer loss against a frozen teacher: the soft tracking loss
/// between outputs plus the feature distance, with teacher features mapped
/// through the adapter when widths or grids differ. No gradient reaches the
/// teacher; the adapter (when mounted in `adapter_vars`) does train.
pub fn transfer_loss(
    student: &TrackOutput,
    teacher_out: &TrackOutput,
    adapter: Option<(&Adapter, &Vars)>,
    select: &LayerSelect,
    weights: &LossWeights,
) -> Result<DiffTensor> {
    // Teacher outputs are detached by construction (no mounted leaves), but
    // make the contract explicit.
    let reference = detached_output(teacher_out);
    let soft = soft_track_loss(student, &reference, weights, true)?;

    let feature_term = match adapter {
        None => {
            let pairs = select.resolve(student.features.len(), reference.features.len())?;
            for (si, ti) in &pairs {
                if student.features[*si].shape() != reference.features[*ti].shape() {
                    return Err(Error::Contract(format!(
                        "teacher feature shape {:?} does not match student {:?} and no adapter is present",
                        reference.features[*ti].shape(),
                        student.features[*si].shape()
                    )));
                }
            }
            feature_l2(&student.features, &reference.features, select)?
        }
        Some((adapter, vars)) => {
            let selected_student: Vec<DiffTensor> = adapter
                .pairs
                .iter()
                .map(|(si, _)| student.features[*si].clone())
                .collect();
            let adapted: Vec<DiffTensor> = adapter
                .pairs
                .iter()
                .map(|(si, ti)| adapter.apply(vars, &reference.features[*ti], *si))
                .collect::<Result<_>>()?;
            feature_l2(&selected_student, &adapted, &LayerSelect::All)?
        }
    };
    soft.add(&feature_term)
}

/// Dual-branch alignment: the masked branch is pulled toward the clean one
/// through the soft tracking loss and the feature distance. With
/// `detach_reference` the clean side is a constant.
pub fn align_loss(
    clean: &TrackOutput,
    masked: &TrackOutput,
    select: &LayerSelect,
    weights: &LossWeights,
    detach_reference: bool,
) -> Result<DiffTensor> {
    if detach_reference {
        let reference = detached_output(clean);
        let soft = soft_track_loss(masked, &reference, weights, true)?;
        let feat = feature_l2(&masked.features, &reference.features, select)?;
        soft.add(&feat)
    } else {
        let soft = soft_track_loss(masked, clean, weights, false)?;
        let feat = feature_l2(&masked.features, &clean.features, select)?;
        soft.add(&feat)
    }
}

/// Component values of one assembled loss, for logging.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossTerms {
    pub clean: f64,
    pub transfer: f64,
    pub align: f64,
    pub total: f64,
}

/// The weighted total: clean + lambda_transfer * transfer + lambda_align *
/// align. Terms with a zero coefficient (or absent inputs) are skipped
/// entirely, so disabling both reduces bitwise to the supervised loss.
#[allow(clippy::too_many_arguments)]
pub fn total_loss(
    clean_out: &TrackOutput,
    masked_out: Option<&TrackOutput>,
    teacher_out: Option<(&TrackOutput, Option<(&Adapter, &Vars)>)>,
    target: &TargetMaps,
    gt: NormBox,
    lambda_transfer: f64,
    lambda_align: f64,
    select: &LayerSelect,
    weights: &LossWeights,
    detach_reference: bool,
) -> Result<(DiffTensor, LossTerms)> {
    let clean = track_loss(clean_out, target, gt, weights)?;
    let mut terms = LossTerms {
        clean: clean.item(),
        ..LossTerms::default()
    };
    let mut total = clean;

    if lambda_transfer > 0.0 {
        let (teacher, adapter) = teacher_out.ok_or_else(|| {
            Error::Contract("lambda_transfer > 0 requires a teacher output".into())
        })?;
        let transfer = transfer_loss(clean_out, teacher, adapter, select, weights)?;
        terms.transfer = transfer.item();
        total = total.add(&transfer.scale(lambda_transfer)?)?;
    }

    if lambda_align > 0.0 {
        let masked = masked_out.ok_or_else(|| {
            Error::Contract("lambda_align > 0 requires a masked-branch output".into())
        })?;
        let align = align_loss(clean_out, masked, select, weights, detach_reference)?;
        terms.align = align.item();
        total = total.add(&align.scale(lambda_align)?)?;
    }

    terms.total = total.item();
    Ok((total, terms))
}
