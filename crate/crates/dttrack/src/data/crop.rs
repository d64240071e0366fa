//! Template/search crop extraction and the crop/canvas coordinate maps.

use crate::loss::NormBox;

use super::generate::Sequence;
use super::image::Image;

pub const DEFAULT_TEMPLATE_FACTOR: f64 = 2.0;
pub const DEFAULT_SEARCH_FACTOR: f64 = 4.0;

/// A square crop window in canvas pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CropWindow {
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
}

impl CropWindow {
    /// The window a box defines: side = factor * sqrt(w_px * h_px).
    pub fn around(b: &NormBox, canvas: usize, factor: f64) -> CropWindow {
        let c = canvas as f64;
        CropWindow {
            cx: b.cx * c,
            cy: b.cy * c,
            side: factor * ((b.w * c) * (b.h * c)).sqrt(),
        }
    }
}

/// A matched training pair with everything needed to map back to the canvas.
#[derive(Clone, Debug)]
pub struct CropPair {
    pub template: Image,
    pub search: Image,
    /// Ground truth of the search frame in search-crop units.
    pub gt: NormBox,
    pub template_window: CropWindow,
    pub search_window: CropWindow,
}

/// Extracts a square window from a raw frame, padding with the frame's mean
/// color where the window leaves the canvas, resampled bilinearly to `res`.
pub fn crop_at(frame: &[u8], canvas: usize, window: &CropWindow, res: usize) -> Image {
    let mut mean = [0.0f64; 3];
    for px in frame.chunks(3) {
        for c in 0..3 {
            mean[c] += px[c] as f64;
        }
    }
    let n = (canvas * canvas) as f64;
    for m in mean.iter_mut() {
        *m /= n * 255.0;
    }

    let sample = |y: isize, x: isize, c: usize| -> f64 {
        if y < 0 || x < 0 || y >= canvas as isize || x >= canvas as isize {
            mean[c]
        } else {
            frame[(y as usize * canvas + x as usize) * 3 + c] as f64 / 255.0
        }
    };

    let mut data = vec![0.0; res * res * 3];
    let left = window.cx - window.side / 2.0;
    let top = window.cy - window.side / 2.0;
    for oy in 0..res {
        for ox in 0..res {
            let sy = top + (oy as f64 + 0.5) * window.side / res as f64 - 0.5;
            let sx = left + (ox as f64 + 0.5) * window.side / res as f64 - 0.5;
            let y0 = sy.floor();
            let x0 = sx.floor();
            let fy = sy - y0;
            let fx = sx - x0;
            let base = (oy * res + ox) * 3;
            for c in 0..3 {
                let p00 = sample(y0 as isize, x0 as isize, c);
                let p01 = sample(y0 as isize, x0 as isize + 1, c);
                let p10 = sample(y0 as isize + 1, x0 as isize, c);
                let p11 = sample(y0 as isize + 1, x0 as isize + 1, c);
                let tophalf = p00 * (1.0 - fx) + p01 * fx;
                let bothalf = p10 * (1.0 - fx) + p11 * fx;
                data[base + c] = tophalf * (1.0 - fy) + bothalf * fy;
            }
        }
    }
    Image::new(res, res, data)
}

/// Re-expresses a canvas-normalized box in crop units.
pub fn box_to_crop(b: &NormBox, window: &CropWindow, canvas: usize) -> NormBox {
    let c = canvas as f64;
    NormBox {
        cx: 0.5 + (b.cx * c - window.cx) / window.side,
        cy: 0.5 + (b.cy * c - window.cy) / window.side,
        w: b.w * c / window.side,
        h: b.h * c / window.side,
    }
}

/// Maps a crop-unit box back to canvas-normalized coordinates.
pub fn box_to_canvas(b: &NormBox, window: &CropWindow, canvas: usize) -> NormBox {
    let c = canvas as f64;
    NormBox {
        cx: (window.cx + (b.cx - 0.5) * window.side) / c,
        cy: (window.cy + (b.cy - 0.5) * window.side) / c,
        w: b.w * window.side / c,
        h: b.h * window.side / c,
    }
}

/// Builds a (template, search) pair from two frames of a sequence, both crops
/// centered on the ground truth. Returns None when either frame is occluded
/// (the caller resamples), or when `center_offset` is given, recentering the
/// search window by that many pixels to vary where the target lands.
pub fn crop_pair(
    seq: &Sequence,
    t_template: usize,
    t_search: usize,
    template_factor: f64,
    search_factor: f64,
    template_res: usize,
    search_res: usize,
    center_offset: Option<(f64, f64)>,
) -> Option<CropPair> {
    if !seq.visible.get(t_template).copied().unwrap_or(false)
        || !seq.visible.get(t_search).copied().unwrap_or(false)
    {
        return None;
    }
    let template_window = CropWindow::around(&seq.boxes[t_template], seq.canvas, template_factor);
    let mut search_window = CropWindow::around(&seq.boxes[t_search], seq.canvas, search_factor);
    if let Some((dx, dy)) = center_offset {
        search_window.cx += dx;
        search_window.cy += dy;
    }
    let template = crop_at(&seq.frames[t_template], seq.canvas, &template_window, template_res);
    let search = crop_at(&seq.frames[t_search], seq.canvas, &search_window, search_res);
    let gt = box_to_crop(&seq.boxes[t_search], &search_window, seq.canvas);
    Some(CropPair {
        template,
        search,
        gt,
        template_window,
        search_window,
    })
}
