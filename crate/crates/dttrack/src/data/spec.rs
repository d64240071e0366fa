//! Generation parameters for synthetic tracking sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{split_seed, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Disc,
    Rectangle,
    Triangle,
}

/// The tracked object: shape family, fill color, and size range as a
/// fraction of the canvas side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: ShapeKind,
    pub color: [u8; 3],
    pub size_range: (f64, f64),
}

/// Constant-speed motion with random direction changes and wall reflection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    /// Pixels per frame.
    pub speed_range: (f64, f64),
    /// Per-frame probability of picking a fresh direction.
    pub turn_prob: f64,
}

/// Everything needed to render one sequence deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub length: usize,
    pub canvas: usize,
    pub target: TargetSpec,
    pub distractors: usize,
    /// Per-frame probability (frames after the first) that an occluder is
    /// drawn over the target.
    pub occluder_prob: f64,
    pub motion: MotionSpec,
    pub seed: u64,
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(Error::Contract("sequence length must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.occluder_prob) {
            return Err(Error::Contract(format!(
                "occluder probability must be in [0, 1), got {}",
                self.occluder_prob
            )));
        }
        let (lo, hi) = self.target.size_range;
        if !(lo > 0.0 && hi >= lo && hi < 0.5) {
            return Err(Error::Contract(format!(
                "target size range ({lo}, {hi}) must satisfy 0 < lo <= hi < 0.5"
            )));
        }
        if self.canvas < 16 {
            return Err(Error::Contract("canvas must be at least 16 pixels".into()));
        }
        Ok(())
    }
}

/// Dataset-level generation settings: a family of randomized sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataGenConfig {
    pub name: String,
    pub sequences: usize,
    pub length: usize,
    pub canvas: usize,
    pub distractors: usize,
    pub occluder_prob: f64,
    pub size_range: (f64, f64),
    pub speed_range: (f64, f64),
    pub turn_prob: f64,
    pub seed: u64,
}

impl Default for DataGenConfig {
    fn default() -> Self {
        DataGenConfig {
            name: "synthetic".into(),
            sequences: 64,
            length: 40,
            canvas: 128,
            distractors: 2,
            occluder_prob: 0.05,
            size_range: (0.12, 0.28),
            speed_range: (1.0, 3.0),
            turn_prob: 0.1,
            seed: 0,
        }
    }
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 60, 60],
    [60, 200, 70],
    [70, 90, 235],
    [235, 200, 60],
    [200, 70, 220],
    [60, 210, 210],
    [240, 140, 50],
    [160, 230, 100],
];

impl DataGenConfig {
    /// Expands into per-sequence specs with varied shapes and colors,
    /// each carrying its own derived seed.
    pub fn specs(&self) -> Vec<SequenceSpec> {
        (0..self.sequences)
            .map(|i| {
                let kind = match i % 3 {
                    0 => ShapeKind::Disc,
                    1 => ShapeKind::Rectangle,
                    _ => ShapeKind::Triangle,
                };
                SequenceSpec {
                    length: self.length,
                    canvas: self.canvas,
                    target: TargetSpec {
                        kind,
                        color: PALETTE[i % PALETTE.len()],
                        size_range: self.size_range,
                    },
                    distractors: self.distractors,
                    occluder_prob: self.occluder_prob,
                    motion: MotionSpec {
                        speed_range: self.speed_range,
                        turn_prob: self.turn_prob,
                    },
                    seed: split_seed(self.seed, &[stream::SEQUENCE, i as u64]),
                }
            })
            .collect()
    }
}
