//! Dual-branch masked training with optional small-teacher transfer.

mod config;
mod losses;
mod mask;
mod schedule;
mod teacher;
mod trainer;

pub use config::DTConfig;
pub use losses::{align_loss, dual_branch_forward, total_loss, transfer_loss, LossTerms};
pub use mask::MaskSpec;
pub use schedule::Schedule;
pub use teacher::{resample_plane, resample_reference, Adapter, TeacherHandle};
pub use trainer::{sample_batch, train, StepRecord, TrainLog, TrainOutcome, TrainPair};
