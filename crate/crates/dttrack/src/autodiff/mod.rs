//! Reverse-mode differentiation over a define-by-run record, a
//! finite-difference checker, and a decoupled-weight-decay optimizer.
//!
//! A record and the tensors attached to it belong to one worker for the
//! duration of a step; detached tensors and [`ParamSet`] snapshots are plain
//! values, safe to share.

mod check;
mod ops;
mod optim;
mod params;
mod tape;
mod tensor;

pub use check::{grad_check, grad_check_params, DEFAULT_FD_STEP};
pub use ops::{apply_primitive, concat, primitive_count, reset_primitive_count, PrimitiveKind};
pub use optim::{OptimHyper, OptimState};
pub use params::{Param, ParamSet};
pub use tape::{backward, GradMap, Tape};
pub use tensor::{
    precision, set_default_precision, set_precision, with_precision, DiffTensor, Precision,
};
