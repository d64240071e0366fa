//! Supervision targets for the score, offset, and size heads.

use super::boxes::NormBox;

/// Dense score target with the box regression values at the ground-truth
/// cell. Exactly one score entry equals 1 (the peak).
#[derive(Clone, Debug)]
pub struct TargetMaps {
    /// S*S Gaussian bump, row-major, peak exactly 1 at `cell`.
    pub score: Vec<f64>,
    /// (x, y) sub-cell offset of the center inside the peak cell, in [0, 1).
    pub offset: (f64, f64),
    /// (w, h) in search-crop units.
    pub size: (f64, f64),
    /// (row, col) of the ground-truth cell.
    pub cell: (usize, usize),
    pub grid: usize,
}

/// Builds the Gaussian score target for a ground-truth box on an SxS grid.
///
/// sigma = max(1, (w*S + h*S) / 12) grid cells, floored at one cell so tiny
/// boxes never degenerate to a single hot pixel.
pub fn make_gaussian_target(gt: NormBox, grid: usize) -> TargetMaps {
    let s = grid as f64;
    let cj = ((gt.cx * s).floor() as usize).min(grid - 1);
    let ci = ((gt.cy * s).floor() as usize).min(grid - 1);
    let sigma = 1.0f64.max((gt.w * s + gt.h * s) / 12.0);
    let two_sigma_sq = 2.0 * sigma * sigma;

    let mut score = vec![0.0; grid * grid];
    for i in 0..grid {
        for j in 0..grid {
            let di = i as f64 - ci as f64;
            let dj = j as f64 - cj as f64;
            score[i * grid + j] = (-(di * di + dj * dj) / two_sigma_sq).exp();
        }
    }
    score[ci * grid + cj] = 1.0;

    TargetMaps {
        score,
        offset: (gt.cx * s - cj as f64, gt.cy * s - ci as f64),
        size: (gt.w, gt.h),
        cell: (ci, cj),
        grid,
    }
}

impl TargetMaps {
    /// Sigma used by [`make_gaussian_target`] for this box scale.
    pub fn sigma_for(gt: NormBox, grid: usize) -> f64 {
        1.0f64.max((gt.w * grid as f64 + gt.h * grid as f64) / 12.0)
    }
}
