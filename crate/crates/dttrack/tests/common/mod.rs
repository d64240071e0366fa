//! A from-scratch re-implementation of the tracking metrics, kept deliberately
//! naive and independent of the library's code paths. The real metrics must
//! agree with these to tight tolerance.

use dttrack::loss::NormBox;

/// IoU from first principles: corner arithmetic only.
pub fn oracle_iou(a: &NormBox, b: &NormBox) -> f64 {
    let ax1 = a.cx - a.w / 2.0;
    let ay1 = a.cy - a.h / 2.0;
    let ax2 = a.cx + a.w / 2.0;
    let ay2 = a.cy + a.h / 2.0;
    let bx1 = b.cx - b.w / 2.0;
    let by1 = b.cy - b.h / 2.0;
    let bx2 = b.cx + b.w / 2.0;
    let by2 = b.cy + b.h / 2.0;
    let iw = if ax2.min(bx2) > ax1.max(bx1) { ax2.min(bx2) - ax1.max(bx1) } else { 0.0 };
    let ih = if ay2.min(by2) > ay1.max(by1) { ay2.min(by2) - ay1.max(by1) } else { 0.0 };
    let inter = iw * ih;
    let union = a.w * a.h + b.w * b.h - inter;
    if union <= 0.0 { 0.0 } else { inter / union }
}

/// Success AUC by explicit loops: 21 thresholds i/20, strict `>` comparator,
/// visible frames only.
pub fn oracle_success_auc(preds: &[NormBox], gts: &[NormBox], visible: &[bool]) -> f64 {
    let mut total = 0.0;
    for i in 0..21 {
        let theta = i as f64 / 20.0;
        let mut hits = 0usize;
        let mut count = 0usize;
        for t in 0..preds.len() {
            if !visible[t] {
                continue;
            }
            count += 1;
            if oracle_iou(&preds[t], &gts[t]) > theta {
                hits += 1;
            }
        }
        total += hits as f64 / count as f64;
    }
    total / 21.0
}

/// Precision at the canvas-scaled 20-pixel threshold, non-strict comparator.
pub fn oracle_precision(preds: &[NormBox], gts: &[NormBox], visible: &[bool], canvas: usize) -> f64 {
    let c = canvas as f64;
    let threshold = 20.0 * c / 256.0;
    let mut hits = 0usize;
    let mut count = 0usize;
    for t in 0..preds.len() {
        if !visible[t] {
            continue;
        }
        count += 1;
        let dx = (preds[t].cx - gts[t].cx) * c;
        let dy = (preds[t].cy - gts[t].cy) * c;
        if (dx * dx + dy * dy).sqrt() <= threshold {
            hits += 1;
        }
    }
    hits as f64 / count as f64
}

/// Normalized precision AUC over 101 thresholds i*0.005, distances divided
/// by sqrt(gt area in pixels), non-strict comparator.
pub fn oracle_norm_precision(
    preds: &[NormBox],
    gts: &[NormBox],
    visible: &[bool],
    canvas: usize,
) -> f64 {
    let c = canvas as f64;
    let mut total = 0.0;
    for i in 0..101 {
        let theta = 0.005 * i as f64;
        let mut hits = 0usize;
        let mut count = 0usize;
        for t in 0..preds.len() {
            if !visible[t] {
                continue;
            }
            count += 1;
            let dx = (preds[t].cx - gts[t].cx) * c;
            let dy = (preds[t].cy - gts[t].cy) * c;
            let dist = (dx * dx + dy * dy).sqrt();
            let scale = ((gts[t].w * c) * (gts[t].h * c)).sqrt();
            if dist / scale <= theta {
                hits += 1;
            }
        }
        total += hits as f64 / count as f64;
    }
    total / 101.0
}

/// Random trajectory sets for oracle comparisons.
pub fn random_trajectory(
    rng: &mut rand_chacha::ChaCha12Rng,
    max_len: usize,
) -> (Vec<NormBox>, Vec<NormBox>, Vec<bool>) {
    use rand::RngExt;
    let len = rng.random_range(1..=max_len);
    let mut preds = Vec::with_capacity(len);
    let mut gts = Vec::with_capacity(len);
    let mut visible = Vec::with_capacity(len);
    let mut any_visible = false;
    for t in 0..len {
        let rand_box = |rng: &mut rand_chacha::ChaCha12Rng| {
            let w = rng.random_range(0.05..0.5);
            let h = rng.random_range(0.05..0.5);
            NormBox {
                cx: rng.random_range(w / 2.0..1.0 - w / 2.0),
                cy: rng.random_range(h / 2.0..1.0 - h / 2.0),
                w,
                h,
            }
        };
        let gt = rand_box(rng);
        // Mix of near-misses and wild misses so every threshold bin gets hits.
        let pred = if rng.random_bool(0.6) {
            NormBox {
                cx: (gt.cx + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0),
                cy: (gt.cy + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0),
                w: (gt.w * rng.random_range(0.7..1.4)).clamp(1e-3, 1.0),
                h: (gt.h * rng.random_range(0.7..1.4)).clamp(1e-3, 1.0),
            }
        } else {
            rand_box(rng)
        };
        let vis = t == len - 1 || rng.random_bool(0.85);
        any_visible |= vis;
        preds.push(pred);
        gts.push(gt);
        visible.push(vis);
    }
    if !any_visible {
        visible[0] = true;
    }
    (preds, gts, visible)
}
