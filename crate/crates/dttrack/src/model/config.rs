//! Architecture hyperparameters of the one-stream tracker.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture of the joint template/search transformer and its center head.
///
/// The default is the desk-scale tiny tracker. The search resolution is twice
/// the template resolution by convention; both must be divisible by the patch
/// size, and the embedding width by the head count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    pub patch_size: usize,
    pub embed_dim: usize,
    pub num_layers: usize,
    pub num_heads: usize,
    pub mlp_ratio: f64,
    pub template_resolution: usize,
    pub search_resolution: usize,
    pub head_hidden_dim: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            patch_size: 8,
            embed_dim: 32,
            num_layers: 2,
            num_heads: 4,
            mlp_ratio: 4.0,
            template_resolution: 32,
            search_resolution: 64,
            head_hidden_dim: 32,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.embed_dim == 0 || self.num_layers == 0 || self.num_heads == 0
        {
            return Err(Error::Contract(
                "tracker config: all structural sizes must be positive".into(),
            ));
        }
        if self.template_resolution % self.patch_size != 0 {
            return Err(Error::Contract(format!(
                "template resolution {} not divisible by patch size {}",
                self.template_resolution, self.patch_size
            )));
        }
        if self.search_resolution % self.patch_size != 0 {
            return Err(Error::Contract(format!(
                "search resolution {} not divisible by patch size {}",
                self.search_resolution, self.patch_size
            )));
        }
        if self.embed_dim % self.num_heads != 0 {
            return Err(Error::Contract(format!(
                "embed dim {} not divisible by head count {}",
                self.embed_dim, self.num_heads
            )));
        }
        if !(self.mlp_ratio > 0.0) {
            return Err(Error::Contract("mlp ratio must be positive".into()));
        }
        if self.head_hidden_dim == 0 {
            return Err(Error::Contract("head hidden dim must be positive".into()));
        }
        Ok(())
    }

    /// Side of the score/offset/size maps: search resolution / patch size.
    pub fn grid(&self) -> usize {
        self.search_resolution / self.patch_size
    }

    pub fn template_grid(&self) -> usize {
        self.template_resolution / self.patch_size
    }

    pub fn template_tokens(&self) -> usize {
        self.template_grid() * self.template_grid()
    }

    pub fn search_tokens(&self) -> usize {
        self.grid() * self.grid()
    }

    pub fn mlp_hidden(&self) -> usize {
        (self.embed_dim as f64 * self.mlp_ratio).round() as usize
    }

    pub fn head_dim(&self) -> usize {
        self.embed_dim / self.num_heads
    }
}
