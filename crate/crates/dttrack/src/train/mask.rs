//! Random patch masks for the masked branch.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// A fixed masking pattern over patches: exactly round(ratio * n) entries are
/// true (masked). Deterministic under its seed.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSpec {
    pattern: Vec<bool>,
    pub ratio: f64,
    pub seed: u64,
}

impl MaskSpec {
    /// Uniformly random subset of exactly round(ratio * num_patches) patches.
    pub fn sample(num_patches: usize, ratio: f64, seed: u64) -> Result<MaskSpec> {
        if !(0.0..1.0).contains(&ratio) {
            return Err(Error::Contract(format!(
                "mask ratio must be in [0, 1), got {ratio}"
            )));
        }
        let count = (ratio * num_patches as f64).round() as usize;
        let mut pattern = vec![false; num_patches];
        if count > 0 {
            // Partial Fisher-Yates: the first `count` slots of a shuffle.
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut indices: Vec<usize> = (0..num_patches).collect();
            for i in 0..count {
                let j = rng.random_range(i..num_patches);
                indices.swap(i, j);
                pattern[indices[i]] = true;
            }
        }
        Ok(MaskSpec {
            pattern,
            ratio,
            seed,
        })
    }

    pub fn empty(num_patches: usize) -> MaskSpec {
        MaskSpec {
            pattern: vec![false; num_patches],
            ratio: 0.0,
            seed: 0,
        }
    }

    pub fn pattern(&self) -> &[bool] {
        &self.pattern
    }

    pub fn masked_count(&self) -> usize {
        self.pattern.iter().filter(|m| **m).count()
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masked_count() == 0
    }
}
