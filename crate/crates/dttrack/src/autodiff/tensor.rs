//! Tensor values and the global numeric precision mode.

use std::cell::Cell;
use std::rc::Rc;

use crate::error::{Error, Result};

use super::tape::Tape;

/// Numeric precision for a run.
///
/// `F32` quantizes every primitive output, gradient, and parameter update to
/// 32-bit (stored widened in 64-bit slots); `F64` keeps full doubles for
/// gradient checking. The mode is a per-thread run parameter, not a
/// per-tensor choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

thread_local! {
    static PRECISION: Cell<Option<Precision>> = const { Cell::new(None) };
}

// Process-wide default, observed by threads with no local override (so a CLI
// `--precision` choice reaches worker threads). false = F32.
static DEFAULT_F64: std::sync::atomic::AtomicBool = std::sync::atomic::AtomicBool::new(false);

/// Current precision mode: this thread's override, or the process default.
pub fn precision() -> Precision {
    PRECISION.with(|p| p.get()).unwrap_or_else(|| {
        if DEFAULT_F64.load(std::sync::atomic::Ordering::Relaxed) {
            Precision::F64
        } else {
            Precision::F32
        }
    })
}

/// Sets the precision override for this thread.
pub fn set_precision(p: Precision) {
    PRECISION.with(|c| c.set(Some(p)));
}

/// Sets the process-wide default (used by the CLI at startup, before any
/// worker threads spawn).
pub fn set_default_precision(p: Precision) {
    DEFAULT_F64.store(
        p == Precision::F64,
        std::sync::atomic::Ordering::Relaxed,
    );
}

/// Runs `f` under the given precision on this thread, restoring the previous
/// override after.
pub fn with_precision<T>(p: Precision, f: impl FnOnce() -> T) -> T {
    let prev = PRECISION.with(|c| c.get());
    set_precision(p);
    let out = f();
    PRECISION.with(|c| c.set(prev));
    out
}

#[inline]
pub(crate) fn quantize(x: f64) -> f64 {
    match precision() {
        Precision::F64 => x,
        Precision::F32 => x as f32 as f64,
    }
}

pub(crate) fn quantize_slice(v: &mut [f64]) {
    if precision() == Precision::F32 {
        for x in v.iter_mut() {
            *x = *x as f32 as f64;
        }
    }
}

pub(crate) fn numel_of(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// An n-dimensional real array, row-major, optionally attached to an active
/// computation record for reverse-mode differentiation.
///
/// Cloning is cheap: the value buffer is shared and immutable.
#[derive(Clone)]
pub struct DiffTensor {
    pub(crate) data: Rc<Vec<f64>>,
    pub(crate) shape: Vec<usize>,
    pub(crate) node: Option<(Tape, usize)>,
    pub(crate) requires_grad: bool,
}

impl DiffTensor {
    /// A detached constant. Values are quantized to the active precision.
    pub fn constant(data: Vec<f64>, shape: &[usize]) -> Result<Self> {
        if data.len() != numel_of(shape) {
            return Err(Error::Contract(format!(
                "constant: data length {} != product of shape {:?}",
                data.len(),
                shape
            )));
        }
        let mut data = data;
        quantize_slice(&mut data);
        Ok(DiffTensor {
            data: Rc::new(data),
            shape: shape.to_vec(),
            node: None,
            requires_grad: false,
        })
    }

    /// A detached rank-0 scalar.
    pub fn scalar(x: f64) -> Self {
        DiffTensor {
            data: Rc::new(vec![quantize(x)]),
            shape: vec![],
            node: None,
            requires_grad: false,
        }
    }

    /// A detached tensor filled with one value.
    pub fn full(value: f64, shape: &[usize]) -> Self {
        DiffTensor {
            data: Rc::new(vec![quantize(value); numel_of(shape)]),
            shape: shape.to_vec(),
            node: None,
            requires_grad: false,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    /// Node id in the active record, if attached.
    pub fn node_id(&self) -> Option<usize> {
        self.node.as_ref().map(|(_, id)| *id)
    }

    pub(crate) fn tape(&self) -> Option<&Tape> {
        self.node.as_ref().map(|(t, _)| t)
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on tensor with {} elements", self.data.len());
        self.data[0]
    }

    /// A copy of this value cut loose from the record: no node, no gradient.
    pub fn detach(&self) -> DiffTensor {
        DiffTensor {
            data: Rc::clone(&self.data),
            shape: self.shape.clone(),
            node: None,
            requires_grad: false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl std::fmt::Debug for DiffTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffTensor")
            .field("shape", &self.shape)
            .field("requires_grad", &self.requires_grad)
            .field("node", &self.node_id())
            .field("data", &&self.data[..self.data.len().min(8)])
            .finish()
    }
}
