//! Gaussian-weighted focal loss over the score map.

use crate::autodiff::DiffTensor;
use crate::error::{Error, Result};

use super::target::TargetMaps;

pub const FOCAL_ALPHA: f64 = 2.0;
pub const FOCAL_BETA: f64 = 4.0;

/// Gaussian-weighted focal loss with alpha = 2, beta = 4.
///
/// At the peak cell (target exactly 1): -(1-p)^alpha * log(p).
/// Elsewhere: -(1-t)^beta * p^alpha * log(1-p).
/// Summed over cells and divided by the number of peak cells (one).
pub fn focal_loss(score_map: &DiffTensor, target: &TargetMaps) -> Result<DiffTensor> {
    let grid = target.grid;
    if score_map.numel() != grid * grid {
        return Err(Error::ShapeMismatch {
            op: "focal-loss",
            lhs: score_map.shape().to_vec(),
            rhs: vec![grid, grid],
        });
    }

    // Constant-side weights: the peak indicator and the Gaussian down-weight
    // of negatives are functions of the target only.
    let mut peak = vec![0.0; grid * grid];
    peak[target.cell.0 * grid + target.cell.1] = 1.0;
    let neg_weight: Vec<f64> = target
        .score
        .iter()
        .zip(&peak)
        .map(|(t, p)| (1.0 - p) * (1.0 - t).powf(FOCAL_BETA))
        .collect();
    let shape = score_map.shape().to_vec();
    let peak = DiffTensor::constant(peak, &shape)?;
    let neg_weight = DiffTensor::constant(neg_weight, &shape)?;

    let one_minus_p = score_map.scale(-1.0)?.add_scalar(1.0)?;
    let pos_term = peak
        .mul(&one_minus_p.powc(FOCAL_ALPHA)?)?
        .mul(&score_map.ln()?.scale(-1.0)?)?;
    let neg_term = neg_weight
        .mul(&score_map.powc(FOCAL_ALPHA)?)?
        .mul(&one_minus_p.ln()?.scale(-1.0)?)?;

    let total = pos_term.add(&neg_term)?.sum()?;
    if !total.is_finite() {
        return Err(Error::NumericFault {
            site: "focal_loss".into(),
            detail: "non-finite loss value".into(),
        });
    }
    Ok(total)
}
