//! The computation record: a linear tape of primitive applications, replayed
//! in reverse to accumulate gradients.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{Error, Result};

use super::ops::{backward_node, PrimitiveKind};
use super::tensor::{numel_of, quantize_slice, DiffTensor};

pub(crate) enum NodeKind {
    Leaf,
    Prim(PrimitiveKind),
}

pub(crate) struct Node {
    pub kind: NodeKind,
    pub inputs: Vec<usize>,
    pub in_data: Vec<Rc<Vec<f64>>>,
    pub in_shapes: Vec<Vec<usize>>,
    pub out_data: Rc<Vec<f64>>,
    pub out_shape: Vec<usize>,
    pub requires_grad: bool,
    pub name: Option<String>,
}

pub(crate) struct TapeInner {
    pub nodes: Vec<Node>,
    pub consumed: bool,
}

/// A define-by-run computation record. One record lives for one training
/// step; [`backward`] consumes it. Node order is topological by construction:
/// every input id precedes its consumer.
#[derive(Clone)]
pub struct Tape {
    pub(crate) inner: Rc<RefCell<TapeInner>>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            inner: Rc::new(RefCell::new(TapeInner {
                nodes: Vec::new(),
                consumed: false,
            })),
        }
    }

    pub(crate) fn same_as(&self, other: &Tape) -> bool {
        Rc::ptr_eq(&self.inner, &other.inner)
    }

    /// Number of recorded nodes (leaves plus primitive applications).
    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_consumed(&self) -> bool {
        self.inner.borrow().consumed
    }

    /// Registers a named differentiable leaf. Values are quantized to the
    /// active precision.
    pub fn leaf(&self, name: &str, data: Vec<f64>, shape: &[usize]) -> Result<DiffTensor> {
        if data.len() != numel_of(shape) {
            return Err(Error::Contract(format!(
                "leaf `{name}`: data length {} != product of shape {:?}",
                data.len(),
                shape
            )));
        }
        if self.is_consumed() {
            return Err(Error::Contract(format!(
                "leaf `{name}`: record already consumed by backward"
            )));
        }
        let mut data = data;
        quantize_slice(&mut data);
        let out = Rc::new(data);
        let id = self.push(Node {
            kind: NodeKind::Leaf,
            inputs: vec![],
            in_data: vec![],
            in_shapes: vec![],
            out_data: Rc::clone(&out),
            out_shape: shape.to_vec(),
            requires_grad: true,
            name: Some(name.to_string()),
        });
        Ok(DiffTensor {
            data: out,
            shape: shape.to_vec(),
            node: Some((self.clone(), id)),
            requires_grad: true,
        })
    }

    /// Registers a non-differentiable constant node so the record is
    /// self-contained. Used internally when a detached tensor feeds a
    /// recorded primitive.
    pub(crate) fn constant_node(&self, t: &DiffTensor) -> usize {
        self.push(Node {
            kind: NodeKind::Leaf,
            inputs: vec![],
            in_data: vec![],
            in_shapes: vec![],
            out_data: Rc::clone(&t.data),
            out_shape: t.shape.clone(),
            requires_grad: false,
            name: None,
        })
    }

    pub(crate) fn push(&self, node: Node) -> usize {
        let mut inner = self.inner.borrow_mut();
        inner.nodes.push(node);
        inner.nodes.len() - 1
    }
}

/// Gradients of a scalar loss with respect to every named differentiable
/// leaf that participated in the record.
#[derive(Debug, Default, Clone)]
pub struct GradMap {
    grads: BTreeMap<String, Vec<f64>>,
}

impl GradMap {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.grads.get(name).map(|v| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.grads.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.grads.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn insert(&mut self, name: String, grad: Vec<f64>) {
        self.grads.insert(name, grad);
    }

    /// Inserts an all-zero gradient for any listed name that is absent.
    /// The gradient of a loss with respect to a parameter it never touched
    /// is zero; callers that mount more leaves than a particular loss uses
    /// complete the cover explicitly with this.
    pub fn zero_fill<'a>(&mut self, names: impl Iterator<Item = (&'a str, usize)>) {
        for (name, numel) in names {
            self.grads
                .entry(name.to_string())
                .or_insert_with(|| vec![0.0; numel]);
        }
    }
}

/// Accumulates gradients of `loss` with respect to every differentiable leaf
/// of its record, with sum semantics for fan-out, and consumes the record.
pub fn backward(loss: &DiffTensor) -> Result<GradMap> {
    if loss.numel() != 1 {
        return Err(Error::Contract(format!(
            "backward: loss must be scalar-shaped, got shape {:?}",
            loss.shape()
        )));
    }
    let Some((tape, loss_id)) = loss.node.clone() else {
        return Err(Error::Contract(
            "backward: loss is detached from any computation record".into(),
        ));
    };

    let nodes = {
        let mut inner = tape.inner.borrow_mut();
        if inner.consumed {
            return Err(Error::Contract(
                "backward: record already consumed".into(),
            ));
        }
        inner.consumed = true;
        std::mem::take(&mut inner.nodes)
    };

    let mut grads: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
    grads[loss_id] = Some(vec![1.0]);

    for id in (0..=loss_id).rev() {
        let Some(out_grad) = grads[id].take() else {
            continue;
        };
        let node = &nodes[id];
        if let NodeKind::Leaf = node.kind {
            grads[id] = Some(out_grad);
            continue;
        }
        let contributions = backward_node(node, &out_grad);
        for (slot, contrib) in node.inputs.iter().zip(contributions) {
            let Some(mut contrib) = contrib else { continue };
            if !nodes[*slot].requires_grad {
                continue;
            }
            quantize_slice(&mut contrib);
            match &mut grads[*slot] {
                Some(acc) => {
                    for (a, c) in acc.iter_mut().zip(contrib) {
                        *a += c;
                    }
                }
                slot_grad => *slot_grad = Some(contrib),
            }
        }
        // out_grad dropped: interior gradients are not retained.
    }

    let mut map = GradMap::default();
    for (id, node) in nodes.iter().enumerate() {
        if let (NodeKind::Leaf, Some(name), true) = (&node.kind, &node.name, node.requires_grad) {
            let mut g = grads[id]
                .take()
                .unwrap_or_else(|| vec![0.0; node.out_data.len()]);
            quantize_slice(&mut g);
            map.insert(name.clone(), g);
        }
    }
    Ok(map)
}
