//! Reading a box out of the center-head maps.

use crate::loss::NormBox;

/// Argmax over a row-major SxS map; ties break to the smallest raster index.
pub fn argmax_cell(score: &[f64], grid: usize) -> (usize, usize) {
    let mut best = 0usize;
    for (i, v) in score.iter().enumerate() {
        if *v > score[best] {
            best = i;
        }
    }
    (best / grid, best % grid)
}

/// Decodes the box at `location` (defaults to the score argmax):
/// center = (cell coordinate + sub-cell offset) / S, size read directly,
/// everything clamped to valid normalized-crop units.
///
/// Maps are row-major: `score` is SxS, `offset` and `size` are [2, S, S]
/// with x/w in channel 0 and y/h in channel 1.
pub fn decode_box(
    score: &[f64],
    offset: &[f64],
    size: &[f64],
    grid: usize,
    location: Option<(usize, usize)>,
) -> NormBox {
    let (row, col) = location.unwrap_or_else(|| argmax_cell(score, grid));
    let cell = row * grid + col;
    let plane = grid * grid;
    let ox = offset[cell];
    let oy = offset[plane + cell];
    let s = grid as f64;
    NormBox {
        cx: (col as f64 + ox) / s,
        cy: (row as f64 + oy) / s,
        w: size[cell],
        h: size[plane + cell],
    }
    .clamped()
}
