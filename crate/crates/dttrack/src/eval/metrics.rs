//! Trajectory-level tracking metrics.
//!
//! Comparators are pinned: success counts IoU strictly greater than the
//! threshold; both precision metrics count distance less than or equal to
//! the threshold. Invisible frames never contribute.

use crate::error::{Error, Result};
use crate::loss::{iou, NormBox};

/// 21 IoU thresholds: 0.00, 0.05, ..., 1.00.
pub const IOU_THRESHOLD_COUNT: usize = 21;
/// 101 normalized-distance thresholds: 0.000, 0.005, ..., 0.500.
pub const NORM_PRECISION_THRESHOLD_COUNT: usize = 101;
/// The classic center-error threshold in pixels, defined at the reference
/// canvas size below and scaled proportionally for other canvases.
pub const PRECISION_PIXELS: f64 = 20.0;
pub const REFERENCE_CANVAS: f64 = 256.0;

fn check_lengths(preds: &[NormBox], gts: &[NormBox], visible: &[bool]) -> Result<()> {
    if preds.len() != gts.len() || preds.len() != visible.len() {
        return Err(Error::Contract(format!(
            "metric inputs must have equal lengths: {} predictions, {} truths, {} flags",
            preds.len(),
            gts.len(),
            visible.len()
        )));
    }
    Ok(())
}

fn visible_indices(visible: &[bool]) -> Result<Vec<usize>> {
    let idx: Vec<usize> = visible
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.then_some(i))
        .collect();
    if idx.is_empty() {
        return Err(Error::UndefinedMetric(
            "no visible frames to evaluate".into(),
        ));
    }
    Ok(idx)
}

/// Mean over the 21-threshold grid of the fraction of visible frames whose
/// IoU strictly exceeds the threshold.
pub fn success_auc(preds: &[NormBox], gts: &[NormBox], visible: &[bool]) -> Result<f64> {
    check_lengths(preds, gts, visible)?;
    let idx = visible_indices(visible)?;
    let ious: Vec<f64> = idx.iter().map(|&i| iou(&preds[i], &gts[i])).collect();
    let mut total = 0.0;
    for step in 0..IOU_THRESHOLD_COUNT {
        let theta = step as f64 / (IOU_THRESHOLD_COUNT - 1) as f64;
        let hits = ious.iter().filter(|v| **v > theta).count();
        total += hits as f64 / ious.len() as f64;
    }
    Ok(total / IOU_THRESHOLD_COUNT as f64)
}

/// (precision at the scaled 20-pixel threshold, normalized-precision AUC).
///
/// Center distances are measured in canvas pixels; the normalized variant
/// divides by sqrt(gt_w_px * gt_h_px) and averages over the 101-threshold
/// grid up to 0.5.
pub fn precision_metrics(
    preds: &[NormBox],
    gts: &[NormBox],
    visible: &[bool],
    canvas: usize,
) -> Result<(f64, f64)> {
    check_lengths(preds, gts, visible)?;
    let idx = visible_indices(visible)?;
    let c = canvas as f64;

    let dists: Vec<f64> = idx
        .iter()
        .map(|&i| preds[i].center_distance(&gts[i]) * c)
        .collect();
    let threshold = PRECISION_PIXELS * c / REFERENCE_CANVAS;
    let precision = dists.iter().filter(|d| **d <= threshold).count() as f64 / dists.len() as f64;

    let normalized: Vec<f64> = idx
        .iter()
        .zip(&dists)
        .map(|(&i, d)| d / ((gts[i].w * c) * (gts[i].h * c)).sqrt())
        .collect();
    let mut total = 0.0;
    for step in 0..NORM_PRECISION_THRESHOLD_COUNT {
        let theta = 0.5 * step as f64 / (NORM_PRECISION_THRESHOLD_COUNT - 1) as f64;
        let hits = normalized.iter().filter(|d| **d <= theta).count();
        total += hits as f64 / normalized.len() as f64;
    }
    Ok((precision, total / NORM_PRECISION_THRESHOLD_COUNT as f64))
}

/// The full success curve (threshold, fraction) for plotting.
pub fn success_curve(preds: &[NormBox], gts: &[NormBox], visible: &[bool]) -> Result<Vec<(f64, f64)>> {
    check_lengths(preds, gts, visible)?;
    let idx = visible_indices(visible)?;
    let ious: Vec<f64> = idx.iter().map(|&i| iou(&preds[i], &gts[i])).collect();
    Ok((0..IOU_THRESHOLD_COUNT)
        .map(|step| {
            let theta = step as f64 / (IOU_THRESHOLD_COUNT - 1) as f64;
            let frac = ious.iter().filter(|v| **v > theta).count() as f64 / ious.len() as f64;
            (theta, frac)
        })
        .collect())
}
