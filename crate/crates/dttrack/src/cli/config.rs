//! Run-configuration files: JSON schemas, dotted-path overrides, and parse
//! errors that point at the offending field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::DataGenConfig;
use crate::error::{Error, Result};
use crate::eval::InferConfig;
use crate::model::TrackerConfig;
use crate::train::DTConfig;

/// Config file of `gen-data`: one entry per dataset to build.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataFile {
    pub datasets: Vec<DataGenConfig>,
}

/// Benchmark section shared by `train`, `sweep`, and `eval`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Suites generated on the fly.
    pub suites: Vec<DataGenConfig>,
    /// Suites loaded from dataset directories built by `gen-data`.
    pub suite_dirs: Vec<PathBuf>,
    pub infer: InferConfig,
}

/// Config file of `train` and the base config of `sweep`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainRunConfig {
    pub tracker: TrackerConfig,
    pub train: DTConfig,
    /// Datasets generated on the fly.
    pub data: Vec<DataGenConfig>,
    /// Datasets loaded from directories built by `gen-data`.
    pub data_dirs: Vec<PathBuf>,
    /// Manifest path of a frozen teacher checkpoint.
    pub teacher: Option<PathBuf>,
    pub eval: Option<EvalSection>,
}

/// Parses a config file, applies dotted-path overrides last, and
/// deserializes strictly (unknown keys are rejected with a suggestion).
///
/// Overrides address the fully resolved structure: the file is deserialized
/// once to fill defaults, re-serialized, patched, and deserialized again, so
/// `train.mask_ratio.end` works even when the file never mentions the
/// schedule.
pub fn parse_config<T: DeserializeOwned + serde::Serialize>(
    path: &Path,
    overrides: &[(String, String)],
) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let typed: T = typed_from_value(value)?;
    if overrides.is_empty() {
        return Ok(typed);
    }
    let mut value = serde_json::to_value(&typed)
        .map_err(|e| Error::Config(format!("re-serializing resolved config: {e}")))?;
    for (key, raw) in overrides {
        apply_override(&mut value, key, raw)?;
    }
    typed_from_value(value)
}

/// Deserializes a JSON value strictly, decorating unknown-field errors with a
/// nearest-field suggestion.
pub fn typed_from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Config(with_suggestion(&e.to_string())))
}

/// Sets `value[path...] = parsed(raw)`, creating intermediate objects. The
/// raw text is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(value: &mut serde_json::Value, dotted: &str, raw: &str) -> Result<()> {
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = value;
    let parts: Vec<&str> = dotted.split('.').collect();
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override path `{dotted}`")));
    }
    for part in &parts[..parts.len() - 1] {
        if !cursor.is_object() {
            return Err(Error::Config(format!(
                "override `{dotted}`: `{part}` is not an object"
            )));
        }
        cursor = cursor
            .as_object_mut()
            .expect("checked above")
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    match cursor.as_object_mut() {
        Some(obj) => {
            obj.insert(parts[parts.len() - 1].to_string(), parsed);
            Ok(())
        }
        None => Err(Error::Config(format!(
            "override `{dotted}`: parent is not an object"
        ))),
    }
}

/// Appends a did-you-mean hint to serde's unknown-field message, which lists
/// the expected fields.
fn with_suggestion(message: &str) -> String {
    let Some(rest) = message.strip_prefix("unknown field `") else {
        return message.to_string();
    };
    let Some(end) = rest.find('`') else {
        return message.to_string();
    };
    let unknown = &rest[..end];
    let candidates: Vec<&str> = rest[end..]
        .split('`')
        .skip(2)
        .step_by(2)
        .collect();
    let best = candidates
        .iter()
        .map(|c| (levenshtein(unknown, c), *c))
        .min();
    match best {
        Some((dist, candidate)) if dist <= 1 + unknown.len() / 2 => {
            format!("{message} — did you mean `{candidate}`?")
        }
        _ => message.to_string(),
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Writes the exact resolved configuration into the run directory so the run
/// can be reproduced from its artifacts alone.
pub fn echo_resolved<T: Serialize>(config: &T, run_dir: &Path) -> Result<()> {
    let path = run_dir.join("config.resolved.json");
    let json = serde_json::to_string_pretty(config)
        .map_err(|e| Error::Config(format!("serializing resolved config: {e}")))?;
    fs::write(&path, json).map_err(|e| Error::io(path.display().to_string(), e))
}
