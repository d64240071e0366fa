//! Tracking losses: Gaussian-focal score supervision, GIoU and L1 box terms,
//! the output-to-output soft variant, and feature distances.

mod boxes;
mod focal;
mod soft;
mod target;
mod track;

pub use boxes::{
    giou, giou_loss, giou_loss_vs_const, iou, l1_box, l1_vs_const, DiffBox, NormBox,
};
pub use focal::{focal_loss, FOCAL_ALPHA, FOCAL_BETA};
pub use soft::{feature_l2, soft_track_loss, LayerSelect};
pub use target::{make_gaussian_target, TargetMaps};
pub use track::{read_box_at_cell, track_loss, LossWeights};

#[cfg(test)]
mod tests;
