//! Dataset packaging, loading, and the balanced two-stage sampler.

use std::fs;
use std::path::Path;

use rand::RngExt;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::fnv1a_hex;

use super::container::{read_sequence, write_sequence};
use super::generate::{generate_sequence, Sequence};
use super::spec::SequenceSpec;

/// Index of one dataset directory.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub files: Vec<String>,
    pub lengths: Vec<usize>,
    pub spec_digest: String,
}

/// A dataset held in memory: the manifest plus every sequence.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub sequences: Vec<Sequence>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Builds a dataset in memory without touching the filesystem.
    pub fn generate(name: &str, specs: &[SequenceSpec]) -> Result<Dataset> {
        let sequences: Vec<Sequence> = specs
            .par_iter()
            .map(generate_sequence)
            .collect::<Result<_>>()?;
        let manifest = DatasetManifest {
            name: name.to_string(),
            files: (0..specs.len()).map(seq_file_name).collect(),
            lengths: sequences.iter().map(Sequence::len).collect(),
            spec_digest: digest_specs(specs)?,
        };
        Ok(Dataset {
            manifest,
            sequences,
        })
    }
}

fn seq_file_name(i: usize) -> String {
    format!("seq_{i:04}.seq")
}

fn digest_specs(specs: &[SequenceSpec]) -> Result<String> {
    let json = serde_json::to_vec(specs)
        .map_err(|e| Error::Config(format!("serializing sequence specs: {e}")))?;
    Ok(fnv1a_hex(&json))
}

/// Generates every sequence (in parallel, each from its own seed), writes the
/// container files and `manifest.json` into `out_dir`.
pub fn build_dataset(name: &str, specs: &[SequenceSpec], out_dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let sequences: Vec<Sequence> = specs
        .par_iter()
        .map(generate_sequence)
        .collect::<Result<_>>()?;
    for (i, seq) in sequences.iter().enumerate() {
        write_sequence(seq, &out_dir.join(seq_file_name(i)))?;
    }
    let manifest = DatasetManifest {
        name: name.to_string(),
        files: (0..specs.len()).map(seq_file_name).collect(),
        lengths: sequences.iter().map(Sequence::len).collect(),
        spec_digest: digest_specs(specs)?,
    };
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("serializing manifest: {e}")))?;
    fs::write(&manifest_path, json).map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    Ok(manifest)
}

/// Loads a dataset directory written by [`build_dataset`].
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join("manifest.json");
    let json = fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&json).map_err(|e| Error::Config(format!("manifest.json: {e}")))?;
    let sequences: Vec<Sequence> = manifest
        .files
        .par_iter()
        .map(|f| read_sequence(&dir.join(f)))
        .collect::<Result<_>>()?;
    for (seq, len) in sequences.iter().zip(&manifest.lengths) {
        if seq.len() != *len {
            return Err(Error::Integrity(format!(
                "dataset {}: sequence length {} does not match manifest ({len})",
                manifest.name,
                seq.len()
            )));
        }
    }
    Ok(Dataset {
        manifest,
        sequences,
    })
}

/// Two-stage balanced draw: first a dataset (uniform, or by the given
/// weights), then a trajectory uniform within it. Larger datasets never
/// overshadow smaller ones.
pub fn balanced_sample(
    datasets: &[Dataset],
    weights: Option<&[f64]>,
    rng: &mut ChaCha12Rng,
) -> Result<(usize, usize)> {
    if datasets.is_empty() {
        return Err(Error::Contract("balanced sample: no datasets".into()));
    }
    for d in datasets {
        if d.is_empty() {
            return Err(Error::Contract(format!(
                "balanced sample: dataset `{}` is empty",
                d.manifest.name
            )));
        }
    }
    let ds = match weights {
        None => rng.random_range(0..datasets.len()),
        Some(w) => {
            if w.len() != datasets.len() {
                return Err(Error::Contract(format!(
                    "balanced sample: {} weights for {} datasets",
                    w.len(),
                    datasets.len()
                )));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) || w.iter().any(|x| *x < 0.0) {
                return Err(Error::Contract(
                    "balanced sample: weights must be nonnegative with positive sum".into(),
                ));
            }
            let mut u = rng.random_range(0.0..total);
            let mut pick = w.len() - 1;
            for (i, wi) in w.iter().enumerate() {
                if u < *wi {
                    pick = i;
                    break;
                }
                u -= wi;
            }
            pick
        }
    };
    let traj = rng.random_range(0..datasets[ds].len());
    Ok((ds, traj))
}
