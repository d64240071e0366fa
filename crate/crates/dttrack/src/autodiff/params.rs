//! Named parameter storage shared by the model, the optimizer, and
//! checkpoints.

use std::collections::BTreeMap;

use rand::RngExt;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::util::digest_f32_le;

use super::tape::Tape;
use super::tensor::{quantize_slice, DiffTensor};

/// One named array. Values are kept quantized to the active precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub data: Vec<f64>,
    pub shape: Vec<usize>,
}

impl Param {
    pub fn zeros(shape: &[usize]) -> Param {
        Param {
            data: vec![0.0; shape.iter().product()],
            shape: shape.to_vec(),
        }
    }

    pub fn filled(value: f64, shape: &[usize]) -> Param {
        let mut data = vec![value; shape.iter().product()];
        quantize_slice(&mut data);
        Param {
            data,
            shape: shape.to_vec(),
        }
    }

    /// Uniform on [-limit, limit], quantized.
    pub fn uniform(shape: &[usize], limit: f64, rng: &mut ChaCha12Rng) -> Param {
        let n: usize = shape.iter().product();
        let mut data: Vec<f64> = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
        quantize_slice(&mut data);
        Param {
            data,
            shape: shape.to_vec(),
        }
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }
}

/// An ordered map of named parameters. Iteration order is the name order,
/// which fixes checkpoint layout and digesting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    map: BTreeMap<String, Param>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, param: Param) {
        self.map.insert(name.into(), param);
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.map.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.map.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.map.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn numel(&self) -> usize {
        self.map.values().map(|p| p.numel()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.map.values().all(|p| p.data.iter().all(|x| x.is_finite()))
    }

    /// Registers every parameter as a differentiable leaf on the tape.
    pub fn mount(&self, tape: &Tape) -> Result<BTreeMap<String, DiffTensor>> {
        let mut out = BTreeMap::new();
        for (name, p) in &self.map {
            out.insert(name.clone(), tape.leaf(name, p.data.clone(), &p.shape)?);
        }
        Ok(out)
    }

    /// Detached constant views for inference.
    pub fn as_constants(&self) -> BTreeMap<String, DiffTensor> {
        self.map
            .iter()
            .map(|(name, p)| {
                (
                    name.clone(),
                    DiffTensor::constant(p.data.clone(), &p.shape)
                        .expect("stored param shapes are consistent"),
                )
            })
            .collect()
    }

    /// Digest over the 32-bit little-endian encoding of all values in name
    /// order — the same bytes a checkpoint blob would contain.
    pub fn digest(&self) -> u64 {
        digest_f32_le(self.map.values().flat_map(|p| p.data.iter().copied()))
    }

    pub fn digest_hex(&self) -> String {
        format!("{:016x}", self.digest())
    }
}

impl FromIterator<(String, Param)> for ParamSet {
    fn from_iter<T: IntoIterator<Item = (String, Param)>>(iter: T) -> Self {
        ParamSet {
            map: iter.into_iter().collect(),
        }
    }
}
