//! The one-stream tracker: patch embedding, joint template/search transformer
//! encoding, and a three-stack center head.

mod config;
mod decode;
mod forward;
mod params;

pub use config::TrackerConfig;
pub use decode::{argmax_cell, decode_box};
pub use forward::{forward, patchify, TrackOutput};
pub use params::TrackerParams;
