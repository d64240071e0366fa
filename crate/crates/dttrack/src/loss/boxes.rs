//! Axis-aligned boxes in normalized coordinates, plain and differentiable.

use serde::{Deserialize, Serialize};

use crate::autodiff::DiffTensor;
use crate::error::Result;

/// A box in normalized units of its reference frame (canvas or search crop):
/// center, width, height, all in [0, 1] with positive extent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl NormBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> NormBox {
        NormBox { cx, cy, w, h }
    }

    /// Clamps the center into [0,1] and the extent into (0,1].
    pub fn clamped(self) -> NormBox {
        NormBox {
            cx: self.cx.clamp(0.0, 1.0),
            cy: self.cy.clamp(0.0, 1.0),
            w: self.w.clamp(1e-4, 1.0),
            h: self.h.clamp(1e-4, 1.0),
        }
    }

    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.cx)
            && (0.0..=1.0).contains(&self.cy)
            && self.w > 0.0
            && self.w <= 1.0
            && self.h > 0.0
            && self.h <= 1.0
    }

    pub fn center_distance(&self, other: &NormBox) -> f64 {
        let dx = self.cx - other.cx;
        let dy = self.cy - other.cy;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Intersection over union.
pub fn iou(a: &NormBox, b: &NormBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

/// Generalized IoU in [-1, 1]: IoU minus the fraction of the enclosing hull
/// not covered by the union.
pub fn giou(a: &NormBox, b: &NormBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    let hull = (ax2.max(bx2) - ax1.min(bx1)) * (ay2.max(by2) - ay1.min(by1));
    if union <= 0.0 || hull <= 0.0 {
        return 0.0;
    }
    inter / union - (hull - union) / hull
}

/// GIoU loss form, in [0, 2].
pub fn giou_loss(a: &NormBox, b: &NormBox) -> f64 {
    1.0 - giou(a, b)
}

/// Mean absolute difference over the four coordinates.
pub fn l1_box(a: &NormBox, b: &NormBox) -> f64 {
    ((a.cx - b.cx).abs() + (a.cy - b.cy).abs() + (a.w - b.w).abs() + (a.h - b.h).abs()) / 4.0
}

/// A box whose coordinates are scalar nodes of the active record.
#[derive(Clone, Debug)]
pub struct DiffBox {
    pub cx: DiffTensor,
    pub cy: DiffTensor,
    pub w: DiffTensor,
    pub h: DiffTensor,
}

impl DiffBox {
    pub fn values(&self) -> NormBox {
        NormBox {
            cx: self.cx.item(),
            cy: self.cy.item(),
            w: self.w.item(),
            h: self.h.item(),
        }
    }
}

// min(x, c) = -max(-x, -c)
fn min_const(x: &DiffTensor, c: f64) -> Result<DiffTensor> {
    x.scale(-1.0)?.max_const(-c)?.scale(-1.0)
}

fn abs_vs_const(x: &DiffTensor, c: f64) -> Result<DiffTensor> {
    let pos = x.add_scalar(-c)?.max_const(0.0)?;
    let neg = x.scale(-1.0)?.add_scalar(c)?.max_const(0.0)?;
    pos.add(&neg)
}

/// GIoU loss (1 - GIoU) of a differentiable box against a fixed box,
/// built from catalogue primitives so gradients reach the prediction.
pub fn giou_loss_vs_const(pred: &DiffBox, fixed: NormBox) -> Result<DiffTensor> {
    let (bx1, by1, bx2, by2) = fixed.corners();
    let half_w = pred.w.scale(0.5)?;
    let half_h = pred.h.scale(0.5)?;
    let ax1 = pred.cx.sub(&half_w)?;
    let ax2 = pred.cx.add(&half_w)?;
    let ay1 = pred.cy.sub(&half_h)?;
    let ay2 = pred.cy.add(&half_h)?;

    let iw = min_const(&ax2, bx2)?.sub(&ax1.max_const(bx1)?)?.max_const(0.0)?;
    let ih = min_const(&ay2, by2)?.sub(&ay1.max_const(by1)?)?.max_const(0.0)?;
    let inter = iw.mul(&ih)?;

    let area_pred = pred.w.mul(&pred.h)?;
    let union = area_pred.add_scalar(fixed.area())?.sub(&inter)?;

    let hull_w = ax2.max_const(bx2)?.sub(&min_const(&ax1, bx1)?)?;
    let hull_h = ay2.max_const(by2)?.sub(&min_const(&ay1, by1)?)?;
    let hull = hull_w.mul(&hull_h)?;

    let giou = inter.div(&union)?.sub(&hull.sub(&union)?.div(&hull)?)?;
    giou.scale(-1.0)?.add_scalar(1.0)
}

/// Mean absolute coordinate difference of a differentiable box against a
/// fixed box.
pub fn l1_vs_const(pred: &DiffBox, fixed: NormBox) -> Result<DiffTensor> {
    abs_vs_const(&pred.cx, fixed.cx)?
        .add(&abs_vs_const(&pred.cy, fixed.cy)?)?
        .add(&abs_vs_const(&pred.w, fixed.w)?)?
        .add(&abs_vs_const(&pred.h, fixed.h)?)?
        .scale(0.25)
}
