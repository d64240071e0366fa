//! Epoch-granular value schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value evolving over epochs. Evaluation is total on [0, total_epochs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    Constant { value: f64 },
    /// start + (end - start) * epoch / (total - 1); a single-epoch run holds
    /// the start value.
    Linear { start: f64, end: f64 },
    /// `before` while epoch < drop_fraction * total, `after` from then on.
    StepDrop {
        before: f64,
        after: f64,
        drop_fraction: f64,
    },
}

impl Schedule {
    pub fn value(&self, epoch: usize, total_epochs: usize) -> Result<f64> {
        if epoch >= total_epochs {
            return Err(Error::Contract(format!(
                "schedule evaluated at epoch {epoch} of {total_epochs}"
            )));
        }
        Ok(match self {
            Schedule::Constant { value } => *value,
            Schedule::Linear { start, end } => {
                if total_epochs == 1 {
                    *start
                } else {
                    start + (end - start) * epoch as f64 / (total_epochs - 1) as f64
                }
            }
            Schedule::StepDrop {
                before,
                after,
                drop_fraction,
            } => {
                if (epoch as f64) < drop_fraction * total_epochs as f64 {
                    *before
                } else {
                    *after
                }
            }
        })
    }

    /// True when the schedule evaluates to zero at every epoch.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Schedule::Constant { value } => *value == 0.0,
            Schedule::Linear { start, end } => *start == 0.0 && *end == 0.0,
            Schedule::StepDrop { before, after, drop_fraction } => {
                (*before == 0.0 || *drop_fraction <= 0.0) && *after == 0.0
            }
        }
    }
}
