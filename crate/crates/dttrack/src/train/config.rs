//! Training hyperparameters and their pinned defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{LayerSelect, LossWeights};

use super::schedule::Schedule;

/// Everything the training loop needs besides the model and the data.
///
/// Defaults pin the reference recipe: transfer weight 0.5 dropped to 0 for
/// the last tenth of the run, alignment weight 0.1, mask ratio ramped
/// linearly 0.05 to 0.4, learning rate divided by 10 at 80% of the epochs,
/// decoupled weight decay 1e-4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DTConfig {
    pub total_epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    /// Fraction of the run after which the learning rate divides by 10.
    pub lr_drop_fraction: f64,
    /// Linear learning-rate warmup over this many leading steps (0 = none).
    pub warmup_steps: usize,
    pub weight_decay: f64,
    pub lambda_align: f64,
    pub lambda_transfer: Schedule,
    pub mask_ratio: Schedule,
    pub feature_layers: LayerSelect,
    pub loss_weights: LossWeights,
    pub seed: u64,
    /// Detach the reference side of output-to-output losses (the default);
    /// false selects the symmetric-gradient variant.
    pub detach_reference: bool,
    /// Mask the template branch as well as the search branch.
    pub mask_template: bool,
    /// Maximum frame gap between template and search frames of a pair.
    pub frame_gap_max: usize,
    /// Search-crop center jitter during training, in units of the target box
    /// side, so the target does not always sit dead-center.
    pub center_jitter: f64,
    /// Log-scale jitter of the search-crop side (side *= exp(u), u uniform in
    /// +-scale_jitter), so size regression stays calibrated when inference
    /// crops drift in scale.
    pub scale_jitter: f64,
    pub template_factor: f64,
    pub search_factor: f64,
    /// Optional outer-stage weights for the balanced sampler.
    pub dataset_weights: Option<Vec<f64>>,
}

impl Default for DTConfig {
    fn default() -> Self {
        DTConfig {
            total_epochs: 10,
            steps_per_epoch: 25,
            batch_size: 8,
            base_lr: 4e-4,
            lr_drop_fraction: 0.8,
            warmup_steps: 0,
            weight_decay: 1e-4,
            lambda_align: 0.1,
            lambda_transfer: Schedule::StepDrop {
                before: 0.5,
                after: 0.0,
                drop_fraction: 0.9,
            },
            mask_ratio: Schedule::Linear {
                start: 0.05,
                end: 0.4,
            },
            feature_layers: LayerSelect::Last,
            loss_weights: LossWeights::default(),
            seed: 0,
            detach_reference: true,
            mask_template: false,
            frame_gap_max: 30,
            center_jitter: 0.5,
            scale_jitter: 0.4,
            template_factor: 2.0,
            search_factor: 4.0,
            dataset_weights: None,
        }
    }
}

impl DTConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_epochs == 0 || self.steps_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Contract(
                "epochs, steps per epoch, and batch size must be positive".into(),
            ));
        }
        if !(self.base_lr > 0.0) {
            return Err(Error::Contract("base learning rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.lr_drop_fraction) {
            return Err(Error::Contract("lr drop fraction must be in [0, 1]".into()));
        }
        if self.lambda_align < 0.0 {
            return Err(Error::Contract("lambda_align must be nonnegative".into()));
        }
        if self.frame_gap_max == 0 {
            return Err(Error::Contract("frame gap must be at least 1".into()));
        }
        Ok(())
    }

    /// Learning rate at an epoch: base until the drop point, then base / 10.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if (epoch as f64) < self.lr_drop_fraction * self.total_epochs as f64 {
            self.base_lr
        } else {
            self.base_lr / 10.0
        }
    }

    /// Epoch rate additionally ramped over the leading warmup steps.
    pub fn lr_at_step(&self, epoch: usize, step: usize) -> f64 {
        let base = self.lr_at(epoch);
        let global = epoch * self.steps_per_epoch + step;
        if global < self.warmup_steps {
            base * (global + 1) as f64 / self.warmup_steps as f64
        } else {
            base
        }
    }
}
