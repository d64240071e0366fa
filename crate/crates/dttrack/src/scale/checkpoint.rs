//! Checkpoint persistence: a JSON manifest plus a raw little-endian f32 blob.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autodiff::{Param, ParamSet};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::model::{TrackerConfig, TrackerParams};
use crate::train::DTConfig;
use crate::util::fnv1a_hex;

/// Placement of one tensor inside the blob. Offsets count f32 elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorIndexEntry {
    pub name: String,
    pub offset: u64,
    pub shape: Vec<usize>,
}

/// Everything about a trained model except the raw parameter bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub id: String,
    pub tracker: TrackerConfig,
    pub train: DTConfig,
    /// Ancestor checkpoint ids oldest-first, ending with this checkpoint's
    /// own id.
    pub lineage: Vec<String>,
    pub dataset_digest: String,
    pub metrics: Option<EvalReport>,
    /// FNV-1a over the blob bytes.
    pub params_digest: String,
    pub tensors: Vec<TensorIndexEntry>,
}

/// A persisted (or persistable) model: manifest, model parameters, and the
/// adapter parameters trained alongside (stored, but never used at
/// inference).
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub manifest: CheckpointManifest,
    pub params: TrackerParams,
    pub adapter: Option<ParamSet>,
}

fn blob_of(params: &TrackerParams, adapter: Option<&ParamSet>) -> (Vec<u8>, Vec<TensorIndexEntry>) {
    let mut blob = Vec::new();
    let mut index = Vec::new();
    let mut offset = 0u64;
    let mut push = |name: &str, p: &Param, blob: &mut Vec<u8>, index: &mut Vec<TensorIndexEntry>| {
        index.push(TensorIndexEntry {
            name: name.to_string(),
            offset,
            shape: p.shape.clone(),
        });
        for v in &p.data {
            blob.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        offset += p.data.len() as u64;
    };
    for (name, p) in params.set.iter() {
        push(name, p, &mut blob, &mut index);
    }
    if let Some(adapter) = adapter {
        for (name, p) in adapter.iter() {
            push(name, p, &mut blob, &mut index);
        }
    }
    (blob, index)
}

/// The content-derived checkpoint id: a digest over the architecture and the
/// parameter bytes, so identical runs produce identical ids.
pub fn checkpoint_id(tracker: &TrackerConfig, params: &TrackerParams, adapter: Option<&ParamSet>) -> String {
    let (blob, _) = blob_of(params, adapter);
    let cfg_json = serde_json::to_vec(tracker).expect("config serializes");
    let mut bytes = cfg_json;
    bytes.extend_from_slice(&blob);
    fnv1a_hex(&bytes)
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        tracker: TrackerConfig,
        train: DTConfig,
        params: TrackerParams,
        adapter: Option<ParamSet>,
        ancestors: Vec<String>,
        dataset_digest: String,
        metrics: Option<EvalReport>,
    ) -> Checkpoint {
        let (blob, tensors) = blob_of(&params, adapter.as_ref());
        let id = checkpoint_id(&tracker, &params, adapter.as_ref());
        let mut lineage = ancestors;
        lineage.push(id.clone());
        Checkpoint {
            manifest: CheckpointManifest {
                id,
                tracker,
                train,
                lineage,
                dataset_digest,
                metrics,
                params_digest: fnv1a_hex(&blob),
                tensors,
            },
            params,
            adapter,
        }
    }

    pub fn id(&self) -> &str {
        &self.manifest.id
    }

    /// Writes `<id>.manifest.json` and `<id>.params.bin`; returns the
    /// manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let (blob, _) = blob_of(&self.params, self.adapter.as_ref());
        let bin_path = dir.join(format!("{}.params.bin", self.manifest.id));
        fs::write(&bin_path, &blob).map_err(|e| Error::io(bin_path.display().to_string(), e))?;
        let manifest_path = dir.join(format!("{}.manifest.json", self.manifest.id));
        let json = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| Error::Config(format!("serializing manifest: {e}")))?;
        fs::write(&manifest_path, json)
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
        Ok(manifest_path)
    }

    /// Loads a checkpoint from its manifest path. The sibling blob must
    /// match the tensor index in length and the recorded digest byte for
    /// byte.
    pub fn load(manifest_path: &Path) -> Result<Checkpoint> {
        let json = fs::read_to_string(manifest_path)
            .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
        let manifest: CheckpointManifest = serde_json::from_str(&json)
            .map_err(|e| Error::Config(format!("{}: {e}", manifest_path.display())))?;

        let bin_path = manifest_path.with_file_name(format!("{}.params.bin", manifest.id));
        let blob = fs::read(&bin_path).map_err(|e| Error::io(bin_path.display().to_string(), e))?;

        let total_elems: u64 = manifest
            .tensors
            .iter()
            .map(|t| t.shape.iter().product::<usize>() as u64)
            .sum();
        if blob.len() as u64 != total_elems * 4 {
            return Err(Error::Integrity(format!(
                "{}: blob holds {} bytes but the tensor index needs {}",
                bin_path.display(),
                blob.len(),
                total_elems * 4
            )));
        }
        if fnv1a_hex(&blob) != manifest.params_digest {
            return Err(Error::Integrity(format!(
                "{}: blob digest does not match the manifest",
                bin_path.display()
            )));
        }

        let mut model = ParamSet::new();
        let mut adapter = ParamSet::new();
        for entry in &manifest.tensors {
            let numel: usize = entry.shape.iter().product();
            let start = entry.offset as usize * 4;
            let data: Vec<f64> = (0..numel)
                .map(|i| {
                    let b = &blob[start + i * 4..start + i * 4 + 4];
                    f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64
                })
                .collect();
            let param = Param {
                data,
                shape: entry.shape.clone(),
            };
            if entry.name.starts_with("adapter.") {
                adapter.insert(entry.name.clone(), param);
            } else {
                model.insert(entry.name.clone(), param);
            }
        }

        Ok(Checkpoint {
            manifest,
            params: TrackerParams { set: model },
            adapter: (!adapter.is_empty()).then_some(adapter),
        })
    }
}
