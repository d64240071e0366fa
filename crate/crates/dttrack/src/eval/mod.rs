//! Benchmark inference with the Hanning prior, tracking metrics, and
//! suite-level aggregation.

mod metrics;
mod report;
mod track;
mod window;

pub use metrics::{
    precision_metrics, success_auc, success_curve, IOU_THRESHOLD_COUNT,
    NORM_PRECISION_THRESHOLD_COUNT, PRECISION_PIXELS, REFERENCE_CANVAS,
};
pub use report::{bench_aggregate, evaluate, EvalReport, SuiteResult};
pub use track::{track_sequence, InferConfig};
pub use window::{penalize, HannWindow};

#[cfg(test)]
mod tests;
