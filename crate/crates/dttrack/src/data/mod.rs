//! Synthetic tracking videos, dataset packaging, sampling, and crops.

mod container;
mod crop;
mod dataset;
mod generate;
mod image;
mod spec;

pub use container::{read_sequence, write_sequence};
pub use crop::{
    box_to_canvas, box_to_crop, crop_at, crop_pair, CropPair, CropWindow, DEFAULT_SEARCH_FACTOR,
    DEFAULT_TEMPLATE_FACTOR,
};
pub use dataset::{balanced_sample, build_dataset, load_dataset, Dataset, DatasetManifest};
pub use generate::{coverage_from_record, generate_sequence, OccluderRect, Sequence};
pub use image::Image;
pub use spec::{DataGenConfig, MotionSpec, SequenceSpec, ShapeKind, TargetSpec};

#[cfg(test)]
mod tests;
