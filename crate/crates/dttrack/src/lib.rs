//! Desk-scale progressive training for a one-stream transformer tracker.
//!
//! The crate trains a tiny template/search transformer tracker on synthetic
//! moving-shape videos, with three training ingredients that compose:
//!
//! * **supervised tracking loss** — Gaussian-weighted focal on the score map
//!   plus generalized-IoU and L1 box terms ([`loss`]);
//! * **dual-branch masked alignment** — a clean and a randomly masked view of
//!   the search image pass through shared weights and are pulled together
//!   ([`train`]);
//! * **small-teacher transfer** — a frozen, previously trained smaller model
//!   guides a larger student through output and feature losses ([`train`]),
//!   which chains into multi-stage growth plans ([`scale`]).
//!
//! Everything runs on a from-scratch reverse-mode engine ([`autodiff`]) so
//! gradients are exact and checkable against finite differences. Benchmarks,
//! metrics, and the tracking protocol live in [`eval`]; synthetic data in
//! [`data`]; the command-line surface in [`cli`].
//!
//! Start with the runnable programs under `examples/`.

pub mod autodiff;
pub mod cli;
pub mod data;
pub mod loss;
pub mod model;
pub mod scale;
pub mod train;
pub mod error;
pub mod eval;
pub mod util;

pub use error::{Error, Result};
