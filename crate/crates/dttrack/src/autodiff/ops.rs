//! The primitive catalogue: forward kernels, shape rules, and exact
//! reverse-mode rules for every operation the record can hold.

use std::cell::Cell;
use std::rc::Rc;

use crate::error::{Error, Result};

use super::tape::{Node, NodeKind, Tape};
use super::tensor::{numel_of, quantize_slice, DiffTensor};

/// Everything the record can replay. Parameters that shape the operation
/// (axes, exponents, target shapes) live on the kind itself.
#[derive(Clone, Debug, PartialEq)]
pub enum PrimitiveKind {
    Add,
    Subtract,
    Multiply,
    Divide,
    MatMul,
    Transpose,
    Reshape(Vec<usize>),
    Concatenate(usize),
    Slice { axis: usize, start: usize, len: usize },
    Broadcast(Vec<usize>),
    SumReduce,
    MeanReduce,
    Exp,
    Ln,
    Sqrt,
    Power(f64),
    MaxConst(f64),
    Gelu,
    Sigmoid,
    SoftmaxLast,
    LayerNormLast(f64),
}

thread_local! {
    static PRIMITIVE_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of primitive applications on this thread since the last reset.
/// Instrumentation for cost-invariance checks; recording status does not
/// affect the count.
pub fn primitive_count() -> u64 {
    PRIMITIVE_COUNT.with(|c| c.get())
}

pub fn reset_primitive_count() {
    PRIMITIVE_COUNT.with(|c| c.set(0));
}

const GELU_C: f64 = 0.044_715;

fn sqrt_2_over_pi() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Applies one primitive to the inputs. If any input requires gradients the
/// application is appended to that input's computation record with the values
/// reverse mode needs; otherwise the result is a detached constant.
pub fn apply_primitive(kind: PrimitiveKind, inputs: &[&DiffTensor]) -> Result<DiffTensor> {
    PRIMITIVE_COUNT.with(|c| c.set(c.get() + 1));

    let (mut out_data, out_shape) = forward(&kind, inputs)?;
    quantize_slice(&mut out_data);
    let out_data = Rc::new(out_data);

    let requires = inputs.iter().any(|t| t.requires_grad);
    if !requires {
        return Ok(DiffTensor {
            data: out_data,
            shape: out_shape,
            node: None,
            requires_grad: false,
        });
    }

    let mut tape: Option<Tape> = None;
    for t in inputs {
        if let Some(tp) = t.tape() {
            match &tape {
                None => tape = Some(tp.clone()),
                Some(existing) if existing.same_as(tp) => {}
                Some(_) => {
                    return Err(Error::Contract(
                        "primitive inputs belong to different computation records".into(),
                    ))
                }
            }
        }
    }
    let tape = tape.ok_or_else(|| {
        Error::Contract("input requires gradients but is detached from any record".into())
    })?;
    if tape.is_consumed() {
        return Err(Error::Contract(
            "computation record already consumed by backward".into(),
        ));
    }

    let input_ids: Vec<usize> = inputs
        .iter()
        .map(|t| match &t.node {
            Some((_, id)) => *id,
            None => tape.constant_node(t),
        })
        .collect();

    let id = tape.push(Node {
        kind: NodeKind::Prim(kind),
        inputs: input_ids,
        in_data: inputs.iter().map(|t| Rc::clone(&t.data)).collect(),
        in_shapes: inputs.iter().map(|t| t.shape.clone()).collect(),
        out_data: Rc::clone(&out_data),
        out_shape: out_shape.clone(),
        requires_grad: true,
        name: None,
    });

    Ok(DiffTensor {
        data: out_data,
        shape: out_shape,
        node: Some((tape, id)),
        requires_grad: true,
    })
}

fn arity(kind: &PrimitiveKind) -> Option<usize> {
    use PrimitiveKind::*;
    match kind {
        Add | Subtract | Multiply | Divide | MatMul => Some(2),
        Concatenate(_) => None,
        _ => Some(1),
    }
}

fn forward(kind: &PrimitiveKind, inputs: &[&DiffTensor]) -> Result<(Vec<f64>, Vec<usize>)> {
    use PrimitiveKind::*;

    if let Some(n) = arity(kind) {
        if inputs.len() != n {
            return Err(Error::Contract(format!(
                "{kind:?} expects {n} inputs, got {}",
                inputs.len()
            )));
        }
    } else if inputs.is_empty() {
        return Err(Error::Contract("concatenate expects at least one input".into()));
    }

    match kind {
        Add | Subtract | Multiply | Divide => {
            let (a, b) = (inputs[0], inputs[1]);
            if a.shape != b.shape {
                return Err(Error::ShapeMismatch {
                    op: elementwise_name(kind),
                    lhs: a.shape.clone(),
                    rhs: b.shape.clone(),
                });
            }
            let out = match kind {
                Add => a.data.iter().zip(b.data.iter()).map(|(x, y)| x + y).collect(),
                Subtract => a.data.iter().zip(b.data.iter()).map(|(x, y)| x - y).collect(),
                Multiply => a.data.iter().zip(b.data.iter()).map(|(x, y)| x * y).collect(),
                Divide => a.data.iter().zip(b.data.iter()).map(|(x, y)| x / y).collect(),
                _ => unreachable!(),
            };
            Ok((out, a.shape.clone()))
        }
        MatMul => {
            let (a, b) = (inputs[0], inputs[1]);
            if a.shape.len() != 2 || b.shape.len() != 2 || a.shape[1] != b.shape[0] {
                return Err(Error::ShapeMismatch {
                    op: "matrix-multiply",
                    lhs: a.shape.clone(),
                    rhs: b.shape.clone(),
                });
            }
            let (m, k, n) = (a.shape[0], a.shape[1], b.shape[1]);
            Ok((matmul_nn(&a.data, &b.data, m, k, n), vec![m, n]))
        }
        Transpose => {
            let a = inputs[0];
            if a.shape.len() != 2 {
                return Err(Error::ShapeMismatch {
                    op: "transpose",
                    lhs: a.shape.clone(),
                    rhs: vec![],
                });
            }
            let (m, n) = (a.shape[0], a.shape[1]);
            let mut out = vec![0.0; m * n];
            for i in 0..m {
                for j in 0..n {
                    out[j * m + i] = a.data[i * n + j];
                }
            }
            Ok((out, vec![n, m]))
        }
        Reshape(target) => {
            let a = inputs[0];
            if numel_of(target) != a.numel() {
                return Err(Error::ShapeMismatch {
                    op: "reshape",
                    lhs: a.shape.clone(),
                    rhs: target.clone(),
                });
            }
            Ok((a.data.to_vec(), target.clone()))
        }
        Concatenate(axis) => {
            let rank = inputs[0].shape.len();
            if *axis >= rank {
                return Err(Error::Contract(format!(
                    "concatenate axis {axis} out of range for rank {rank}"
                )));
            }
            for t in inputs {
                if t.shape.len() != rank {
                    return Err(Error::ShapeMismatch {
                        op: "concatenate",
                        lhs: inputs[0].shape.clone(),
                        rhs: t.shape.clone(),
                    });
                }
                for (d, (&sa, &sb)) in inputs[0].shape.iter().zip(t.shape.iter()).enumerate() {
                    if d != *axis && sa != sb {
                        return Err(Error::ShapeMismatch {
                            op: "concatenate",
                            lhs: inputs[0].shape.clone(),
                            rhs: t.shape.clone(),
                        });
                    }
                }
            }
            let mut out_shape = inputs[0].shape.clone();
            out_shape[*axis] = inputs.iter().map(|t| t.shape[*axis]).sum();
            let outer: usize = out_shape[..*axis].iter().product();
            let inner: usize = out_shape[*axis + 1..].iter().product();
            let mut out = Vec::with_capacity(numel_of(&out_shape));
            for o in 0..outer {
                for t in inputs {
                    let ext = t.shape[*axis];
                    let base = o * ext * inner;
                    out.extend_from_slice(&t.data[base..base + ext * inner]);
                }
            }
            Ok((out, out_shape))
        }
        Slice { axis, start, len } => {
            let a = inputs[0];
            if *axis >= a.shape.len() || start + len > a.shape[*axis] || *len == 0 {
                return Err(Error::Contract(format!(
                    "slice [{start}, {}) on axis {axis} out of range for shape {:?}",
                    start + len,
                    a.shape
                )));
            }
            let mut out_shape = a.shape.clone();
            out_shape[*axis] = *len;
            let outer: usize = a.shape[..*axis].iter().product();
            let ext = a.shape[*axis];
            let inner: usize = a.shape[*axis + 1..].iter().product();
            let mut out = Vec::with_capacity(numel_of(&out_shape));
            for o in 0..outer {
                let base = (o * ext + start) * inner;
                out.extend_from_slice(&a.data[base..base + len * inner]);
            }
            Ok((out, out_shape))
        }
        Broadcast(target) => {
            let a = inputs[0];
            if !broadcast_compatible(&a.shape, target) {
                return Err(Error::ShapeMismatch {
                    op: "broadcast",
                    lhs: a.shape.clone(),
                    rhs: target.clone(),
                });
            }
            let mut out = vec![0.0; numel_of(target)];
            for (flat, slot) in out.iter_mut().enumerate() {
                *slot = a.data[broadcast_src_index(flat, target, &a.shape)];
            }
            Ok((out, target.clone()))
        }
        SumReduce => {
            let a = inputs[0];
            Ok((vec![a.data.iter().sum()], vec![]))
        }
        MeanReduce => {
            let a = inputs[0];
            let n = a.numel().max(1) as f64;
            Ok((vec![a.data.iter().sum::<f64>() / n], vec![]))
        }
        Exp => unary(inputs[0], |x| x.exp()),
        Ln => {
            let a = inputs[0];
            if let Some(bad) = a.data.iter().find(|x| **x <= 0.0) {
                return Err(Error::Domain {
                    op: "natural-log",
                    detail: format!("non-positive input {bad}"),
                });
            }
            unary(a, |x| x.ln())
        }
        Sqrt => {
            let a = inputs[0];
            if let Some(bad) = a.data.iter().find(|x| **x < 0.0) {
                return Err(Error::Domain {
                    op: "square-root",
                    detail: format!("negative input {bad}"),
                });
            }
            unary(a, |x| x.sqrt())
        }
        Power(c) => {
            let a = inputs[0];
            if c.fract() != 0.0 {
                if let Some(bad) = a.data.iter().find(|x| **x < 0.0) {
                    return Err(Error::Domain {
                        op: "power",
                        detail: format!("negative base {bad} with non-integer exponent {c}"),
                    });
                }
            }
            unary(a, |x| x.powf(*c))
        }
        MaxConst(c) => unary(inputs[0], |x| x.max(*c)),
        Gelu => {
            let k = sqrt_2_over_pi();
            unary(inputs[0], |x| {
                0.5 * x * (1.0 + (k * (x + GELU_C * x * x * x)).tanh())
            })
        }
        Sigmoid => unary(inputs[0], |x| sigmoid_scalar(*x)),
        SoftmaxLast => {
            let a = inputs[0];
            let n = last_axis(&a.shape)?;
            let mut out = vec![0.0; a.numel()];
            for (chunk_out, chunk_in) in out.chunks_mut(n).zip(a.data.chunks(n)) {
                let m = chunk_in.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for (o, &x) in chunk_out.iter_mut().zip(chunk_in) {
                    *o = (x - m).exp();
                    sum += *o;
                }
                for o in chunk_out.iter_mut() {
                    *o /= sum;
                }
            }
            Ok((out, a.shape.clone()))
        }
        LayerNormLast(eps) => {
            let a = inputs[0];
            let n = last_axis(&a.shape)?;
            let mut out = vec![0.0; a.numel()];
            for (chunk_out, chunk_in) in out.chunks_mut(n).zip(a.data.chunks(n)) {
                let mean = chunk_in.iter().sum::<f64>() / n as f64;
                let var = chunk_in.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                let inv = 1.0 / (var + eps).sqrt();
                for (o, &x) in chunk_out.iter_mut().zip(chunk_in) {
                    *o = (x - mean) * inv;
                }
            }
            Ok((out, a.shape.clone()))
        }
    }
}

fn elementwise_name(kind: &PrimitiveKind) -> &'static str {
    match kind {
        PrimitiveKind::Add => "add",
        PrimitiveKind::Subtract => "subtract",
        PrimitiveKind::Multiply => "multiply",
        PrimitiveKind::Divide => "divide",
        _ => "elementwise",
    }
}

fn unary(a: &DiffTensor, f: impl Fn(&f64) -> f64) -> Result<(Vec<f64>, Vec<usize>)> {
    Ok((a.data.iter().map(f).collect(), a.shape.clone()))
}

fn last_axis(shape: &[usize]) -> Result<usize> {
    match shape.last() {
        Some(&n) if n > 0 => Ok(n),
        _ => Err(Error::Contract(format!(
            "operation over last axis needs rank >= 1, got shape {shape:?}"
        ))),
    }
}

fn broadcast_compatible(src: &[usize], target: &[usize]) -> bool {
    if src.len() > target.len() {
        return false;
    }
    let offset = target.len() - src.len();
    src.iter()
        .zip(&target[offset..])
        .all(|(&s, &t)| s == t || s == 1)
}

/// Maps a flat index in the broadcast output to the flat index of the source
/// element it reads.
fn broadcast_src_index(mut flat: usize, target: &[usize], src: &[usize]) -> usize {
    let offset = target.len() - src.len();
    let mut idx = 0usize;
    let mut stride = 1usize;
    // Walk axes from last to first, building the source flat index.
    let mut src_strides = vec![0usize; target.len()];
    {
        let mut s = 1usize;
        for d in (0..src.len()).rev() {
            src_strides[offset + d] = if src[d] == 1 { 0 } else { s };
            s *= src[d];
        }
    }
    for d in (0..target.len()).rev() {
        let coord = flat % target[d];
        flat /= target[d];
        idx += coord * src_strides[d];
        stride *= target[d];
    }
    let _ = stride;
    idx
}

// ── matmul kernels ───────────────────────────────────────────────────

/// a [m,k] @ b [k,n] -> [m,n]
pub(crate) fn matmul_nn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// a [m,n] @ b^T where b is [k,n] -> [m,k]
fn matmul_nt(a: &[f64], b: &[f64], m: usize, n: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * k];
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            out[i * k + p] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
    out
}

/// a^T @ g where a is [m,k], g is [m,n] -> [k,n]
fn matmul_tn(a: &[f64], g: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * n];
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &gv) in orow.iter_mut().zip(grow) {
                *o += av * gv;
            }
        }
    }
    out
}

// ── reverse rules ────────────────────────────────────────────────────

/// Gradient contributions of one node to each of its inputs. `None` marks an
/// input that receives no gradient from this rule.
pub(crate) fn backward_node(node: &Node, g: &[f64]) -> Vec<Option<Vec<f64>>> {
    use PrimitiveKind::*;
    let NodeKind::Prim(kind) = &node.kind else {
        return vec![];
    };
    let out = &node.out_data;
    match kind {
        Add => vec![Some(g.to_vec()), Some(g.to_vec())],
        Subtract => vec![Some(g.to_vec()), Some(g.iter().map(|x| -x).collect())],
        Multiply => {
            let (a, b) = (&node.in_data[0], &node.in_data[1]);
            vec![
                Some(g.iter().zip(b.iter()).map(|(g, b)| g * b).collect()),
                Some(g.iter().zip(a.iter()).map(|(g, a)| g * a).collect()),
            ]
        }
        Divide => {
            let (a, b) = (&node.in_data[0], &node.in_data[1]);
            vec![
                Some(g.iter().zip(b.iter()).map(|(g, b)| g / b).collect()),
                Some(
                    g.iter()
                        .zip(a.iter().zip(b.iter()))
                        .map(|(g, (a, b))| -g * a / (b * b))
                        .collect(),
                ),
            ]
        }
        MatMul => {
            let (m, k) = (node.in_shapes[0][0], node.in_shapes[0][1]);
            let n = node.in_shapes[1][1];
            vec![
                Some(matmul_nt(g, &node.in_data[1], m, n, k)),
                Some(matmul_tn(&node.in_data[0], g, m, k, n)),
            ]
        }
        Transpose => {
            let (m, n) = (node.in_shapes[0][0], node.in_shapes[0][1]);
            // g has shape [n, m]; transpose it back to [m, n].
            let mut da = vec![0.0; m * n];
            for j in 0..n {
                for i in 0..m {
                    da[i * n + j] = g[j * m + i];
                }
            }
            vec![Some(da)]
        }
        Reshape(_) => vec![Some(g.to_vec())],
        Concatenate(axis) => {
            let outer: usize = node.out_shape[..*axis].iter().product();
            let inner: usize = node.out_shape[*axis + 1..].iter().product();
            let total_ext = node.out_shape[*axis];
            let mut offsets = Vec::with_capacity(node.in_shapes.len());
            let mut acc = 0;
            for s in &node.in_shapes {
                offsets.push(acc);
                acc += s[*axis];
            }
            node.in_shapes
                .iter()
                .zip(&offsets)
                .map(|(s, &off)| {
                    let ext = s[*axis];
                    let mut da = Vec::with_capacity(numel_of(s));
                    for o in 0..outer {
                        let base = (o * total_ext + off) * inner;
                        da.extend_from_slice(&g[base..base + ext * inner]);
                    }
                    Some(da)
                })
                .collect()
        }
        Slice { axis, start, len } => {
            let shape = &node.in_shapes[0];
            let outer: usize = shape[..*axis].iter().product();
            let ext = shape[*axis];
            let inner: usize = shape[*axis + 1..].iter().product();
            let mut da = vec![0.0; numel_of(shape)];
            for o in 0..outer {
                let src = o * len * inner;
                let dst = (o * ext + start) * inner;
                da[dst..dst + len * inner].copy_from_slice(&g[src..src + len * inner]);
            }
            vec![Some(da)]
        }
        Broadcast(target) => {
            let src = &node.in_shapes[0];
            let mut da = vec![0.0; numel_of(src)];
            for (flat, &gv) in g.iter().enumerate() {
                da[broadcast_src_index(flat, target, src)] += gv;
            }
            vec![Some(da)]
        }
        SumReduce => vec![Some(vec![g[0]; node.in_data[0].len()])],
        MeanReduce => {
            let n = node.in_data[0].len().max(1) as f64;
            vec![Some(vec![g[0] / n; node.in_data[0].len()])]
        }
        Exp => vec![Some(g.iter().zip(out.iter()).map(|(g, y)| g * y).collect())],
        Ln => vec![Some(
            g.iter()
                .zip(node.in_data[0].iter())
                .map(|(g, x)| g / x)
                .collect(),
        )],
        Sqrt => vec![Some(
            g.iter()
                .zip(out.iter())
                .map(|(g, y)| g / (2.0 * y))
                .collect(),
        )],
        Power(c) => vec![Some(
            g.iter()
                .zip(node.in_data[0].iter())
                .map(|(g, x)| g * c * x.powf(c - 1.0))
                .collect(),
        )],
        MaxConst(c) => vec![Some(
            g.iter()
                .zip(node.in_data[0].iter())
                .map(|(g, x)| if *x > *c { *g } else { 0.0 })
                .collect(),
        )],
        Gelu => {
            let k = sqrt_2_over_pi();
            vec![Some(
                g.iter()
                    .zip(node.in_data[0].iter())
                    .map(|(g, x)| {
                        let u = k * (x + GELU_C * x * x * x);
                        let t = u.tanh();
                        let du = k * (1.0 + 3.0 * GELU_C * x * x);
                        g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du)
                    })
                    .collect(),
            )]
        }
        Sigmoid => vec![Some(
            g.iter()
                .zip(out.iter())
                .map(|(g, y)| g * y * (1.0 - y))
                .collect(),
        )],
        SoftmaxLast => {
            let n = *node.out_shape.last().unwrap();
            let mut da = vec![0.0; out.len()];
            for ((da_c, g_c), y_c) in da.chunks_mut(n).zip(g.chunks(n)).zip(out.chunks(n)) {
                let dot: f64 = g_c.iter().zip(y_c).map(|(g, y)| g * y).sum();
                for ((d, &gv), &yv) in da_c.iter_mut().zip(g_c).zip(y_c) {
                    *d = yv * (gv - dot);
                }
            }
            vec![Some(da)]
        }
        LayerNormLast(eps) => {
            let n = *node.out_shape.last().unwrap();
            let x = &node.in_data[0];
            let mut da = vec![0.0; x.len()];
            for ((da_c, g_c), x_c) in da.chunks_mut(n).zip(g.chunks(n)).zip(x.chunks(n)) {
                let nf = n as f64;
                let mean = x_c.iter().sum::<f64>() / nf;
                let var = x_c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
                let inv = 1.0 / (var + eps).sqrt();
                let xhat: Vec<f64> = x_c.iter().map(|v| (v - mean) * inv).collect();
                let g_mean = g_c.iter().sum::<f64>() / nf;
                let gx_mean = g_c.iter().zip(&xhat).map(|(g, h)| g * h).sum::<f64>() / nf;
                for ((d, &gv), &hv) in da_c.iter_mut().zip(g_c).zip(&xhat) {
                    *d = inv * (gv - g_mean - hv * gx_mean);
                }
            }
            vec![Some(da)]
        }
    }
}

// ── tensor-method sugar over the catalogue ───────────────────────────

impl DiffTensor {
    pub fn add(&self, other: &DiffTensor) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Add, &[self, other])
    }

    pub fn sub(&self, other: &DiffTensor) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Subtract, &[self, other])
    }

    pub fn mul(&self, other: &DiffTensor) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Multiply, &[self, other])
    }

    pub fn div(&self, other: &DiffTensor) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Divide, &[self, other])
    }

    pub fn matmul(&self, other: &DiffTensor) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::MatMul, &[self, other])
    }

    pub fn transpose(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Transpose, &[self])
    }

    pub fn reshape(&self, target: &[usize]) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Reshape(target.to_vec()), &[self])
    }

    pub fn slice(&self, axis: usize, start: usize, len: usize) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Slice { axis, start, len }, &[self])
    }

    pub fn broadcast_to(&self, target: &[usize]) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Broadcast(target.to_vec()), &[self])
    }

    pub fn sum(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::SumReduce, &[self])
    }

    pub fn mean(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::MeanReduce, &[self])
    }

    pub fn exp(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Exp, &[self])
    }

    pub fn ln(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Ln, &[self])
    }

    pub fn sqrt(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Sqrt, &[self])
    }

    pub fn powc(&self, c: f64) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Power(c), &[self])
    }

    pub fn max_const(&self, c: f64) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::MaxConst(c), &[self])
    }

    /// Rectifier: max(x, 0).
    pub fn relu(&self) -> Result<DiffTensor> {
        self.max_const(0.0)
    }

    pub fn gelu(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Gelu, &[self])
    }

    pub fn sigmoid(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::Sigmoid, &[self])
    }

    pub fn softmax_last(&self) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::SoftmaxLast, &[self])
    }

    pub fn layer_norm_last(&self, eps: f64) -> Result<DiffTensor> {
        apply_primitive(PrimitiveKind::LayerNormLast(eps), &[self])
    }

    /// Multiplication by a constant, composed from the catalogue.
    pub fn scale(&self, c: f64) -> Result<DiffTensor> {
        self.mul(&DiffTensor::full(c, &self.shape))
    }

    /// Addition of a constant, composed from the catalogue.
    pub fn add_scalar(&self, c: f64) -> Result<DiffTensor> {
        self.add(&DiffTensor::full(c, &self.shape))
    }
}

/// Concatenates tensors along an axis.
pub fn concat(inputs: &[&DiffTensor], axis: usize) -> Result<DiffTensor> {
    apply_primitive(PrimitiveKind::Concatenate(axis), inputs)
}
