//! Joint template/search encoding and the center head.

use std::collections::BTreeMap;

use crate::autodiff::{concat, DiffTensor};
use crate::data::Image;
use crate::error::{Error, Result};
use crate::loss::NormBox;

use super::config::TrackerConfig;
use super::decode::{argmax_cell, decode_box};

const LN_EPS: f64 = 1e-5;

/// One forward pass: the raw differentiable maps, per-layer search-token
/// features, and the box decoded at the score argmax.
#[derive(Clone, Debug)]
pub struct TrackOutput {
    /// SxS score map, strictly inside (0, 1).
    pub score_map: DiffTensor,
    /// [2, S, S] sub-cell offsets in [0, 1): channel 0 is x, channel 1 is y.
    pub offset_map: DiffTensor,
    /// [2, S, S] positive sizes in search-crop units: channel 0 w, channel 1 h.
    pub size_map: DiffTensor,
    /// Search-token features after every layer, each [search_tokens, dim].
    pub features: Vec<DiffTensor>,
    /// Box decoded at the score-map argmax.
    pub bbox: NormBox,
    pub grid: usize,
}

type Vars = BTreeMap<String, DiffTensor>;

fn var<'a>(vars: &'a Vars, name: &str) -> Result<&'a DiffTensor> {
    vars.get(name)
        .ok_or_else(|| Error::Contract(format!("missing parameter `{name}`")))
}

/// Linear projection of flattened patches: N tokens in raster order, each a
/// projection of its patch.
pub fn patchify(image: &Image, patch: usize, weight: &DiffTensor, bias: &DiffTensor) -> Result<DiffTensor> {
    if image.h % patch != 0 || image.w % patch != 0 {
        return Err(Error::Contract(format!(
            "image {}x{} not divisible by patch size {patch}",
            image.h, image.w
        )));
    }
    let gh = image.h / patch;
    let gw = image.w / patch;
    let n = gh * gw;
    let patch_in = patch * patch * 3;
    let mut flat = Vec::with_capacity(n * patch_in);
    for gy in 0..gh {
        for gx in 0..gw {
            for py in 0..patch {
                let y = gy * patch + py;
                let row = (y * image.w + gx * patch) * 3;
                flat.extend_from_slice(&image.data[row..row + patch * 3]);
            }
        }
    }
    let patches = DiffTensor::constant(flat, &[n, patch_in])?;
    let d = weight.shape()[1];
    patches.matmul(weight)?.add(&bias.broadcast_to(&[n, d])?)
}

fn linear(x: &DiffTensor, vars: &Vars, name: &str) -> Result<DiffTensor> {
    let w = var(vars, &format!("{name}.weight"))?;
    let b = var(vars, &format!("{name}.bias"))?;
    let rows = x.shape()[0];
    let cols = w.shape()[1];
    x.matmul(w)?.add(&b.broadcast_to(&[rows, cols])?)
}

fn layer_norm_affine(x: &DiffTensor, vars: &Vars, name: &str) -> Result<DiffTensor> {
    let gain = var(vars, &format!("{name}.gain"))?;
    let bias = var(vars, &format!("{name}.bias"))?;
    let shape = x.shape().to_vec();
    x.layer_norm_last(LN_EPS)?
        .mul(&gain.broadcast_to(&shape)?)?
        .add(&bias.broadcast_to(&shape)?)
}

fn attention(x: &DiffTensor, vars: &Vars, layer: usize, cfg: &TrackerConfig) -> Result<DiffTensor> {
    let tokens = x.shape()[0];
    let dh = cfg.head_dim();
    let prefix = format!("layers.{layer}.attn");
    let q = linear(x, vars, &format!("{prefix}.q"))?.scale(1.0 / (dh as f64).sqrt())?;
    let k = x.matmul(var(vars, &format!("{prefix}.k.weight"))?)?;
    let v = linear(x, vars, &format!("{prefix}.v"))?;

    let mut heads = Vec::with_capacity(cfg.num_heads);
    for h in 0..cfg.num_heads {
        let qh = q.slice(1, h * dh, dh)?;
        let kh = k.slice(1, h * dh, dh)?;
        let vh = v.slice(1, h * dh, dh)?;
        let scores = qh.matmul(&kh.transpose()?)?;
        let attn = scores.softmax_last()?;
        heads.push(attn.matmul(&vh)?);
    }
    let head_refs: Vec<&DiffTensor> = heads.iter().collect();
    let merged = concat(&head_refs, 1)?;
    let _ = tokens;
    linear(&merged, vars, &format!("{prefix}.out"))
}

fn block(x: &DiffTensor, vars: &Vars, layer: usize, cfg: &TrackerConfig) -> Result<DiffTensor> {
    let attn = attention(&layer_norm_affine(x, vars, &format!("layers.{layer}.norm1"))?, vars, layer, cfg)?;
    let x = x.add(&attn)?;
    let h = layer_norm_affine(&x, vars, &format!("layers.{layer}.norm2"))?;
    let h = linear(&h, vars, &format!("layers.{layer}.mlp.fc1"))?.gelu()?;
    let mlp = linear(&h, vars, &format!("layers.{layer}.mlp.fc2"))?;
    x.add(&mlp)
}

/// Two-layer pointwise head over search tokens: fc1 + rectifier + fc2.
fn head_stack(tokens: &DiffTensor, vars: &Vars, name: &str) -> Result<DiffTensor> {
    let h = linear(tokens, vars, &format!("head.{name}.fc1"))?.relu()?;
    linear(&h, vars, &format!("head.{name}.fc2"))
}

fn apply_mask(
    tokens: DiffTensor,
    pattern: &[bool],
    mask_token: &DiffTensor,
    n: usize,
    d: usize,
) -> Result<DiffTensor> {
    if pattern.len() != n {
        return Err(Error::Contract(format!(
            "mask pattern length {} does not match token count {n}",
            pattern.len()
        )));
    }
    let keep: Vec<f64> = pattern.iter().map(|m| if *m { 0.0 } else { 1.0 }).collect();
    let drop: Vec<f64> = pattern.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let keep = DiffTensor::constant(keep, &[n, 1])?.broadcast_to(&[n, d])?;
    let drop = DiffTensor::constant(drop, &[n, 1])?.broadcast_to(&[n, d])?;
    let mask_tok = mask_token.broadcast_to(&[n, d])?;
    tokens.mul(&keep)?.add(&mask_tok.mul(&drop)?)
}

/// Full forward pass of the tracker.
///
/// Template and search images must match the configured resolutions. When a
/// mask pattern is given (one flag per patch, true = masked), masked tokens
/// are replaced by the learnable mask token after positional embedding, so
/// both branches keep identical shapes. Search and template masks are
/// independent; the template is normally left clean.
pub fn forward(
    vars: &Vars,
    cfg: &TrackerConfig,
    template: &Image,
    search: &Image,
    mask: Option<&[bool]>,
    template_mask: Option<&[bool]>,
) -> Result<TrackOutput> {
    cfg.validate()?;
    if template.h != cfg.template_resolution || template.w != cfg.template_resolution {
        return Err(Error::Contract(format!(
            "template image {}x{} does not match configured resolution {}",
            template.h, template.w, cfg.template_resolution
        )));
    }
    if search.h != cfg.search_resolution || search.w != cfg.search_resolution {
        return Err(Error::Contract(format!(
            "search image {}x{} does not match configured resolution {}",
            search.h, search.w, cfg.search_resolution
        )));
    }

    let nt = cfg.template_tokens();
    let ns = cfg.search_tokens();
    let d = cfg.embed_dim;

    let w_patch = var(vars, "patch_embed.weight")?;
    let b_patch = var(vars, "patch_embed.bias")?;
    let mut t_tokens = patchify(template, cfg.patch_size, w_patch, b_patch)?
        .add(var(vars, "pos_embed.template")?)?;
    let mut s_tokens =
        patchify(search, cfg.patch_size, w_patch, b_patch)?.add(var(vars, "pos_embed.search")?)?;

    if let Some(pattern) = mask {
        s_tokens = apply_mask(s_tokens, pattern, var(vars, "mask_token")?, ns, d)?;
    }
    if let Some(pattern) = template_mask {
        t_tokens = apply_mask(t_tokens, pattern, var(vars, "mask_token")?, nt, d)?;
    }

    let mut x = concat(&[&t_tokens, &s_tokens], 0)?;
    let mut features = Vec::with_capacity(cfg.num_layers);
    for layer in 0..cfg.num_layers {
        x = block(&x, vars, layer, cfg)?;
        if !x.is_finite() {
            return Err(Error::NumericFault {
                site: format!("layer {layer}"),
                detail: "non-finite activation".into(),
            });
        }
        features.push(x.slice(0, nt, ns)?);
    }

    let search_tokens = features.last().expect("at least one layer").clone();
    let s = cfg.grid();

    let score_map = head_stack(&search_tokens, vars, "score")?
        .sigmoid()?
        .reshape(&[s, s])?;
    let offset_map = head_stack(&search_tokens, vars, "offset")?
        .sigmoid()?
        .transpose()?
        .reshape(&[2, s, s])?;
    // exp of a bounded pre-activation keeps sizes strictly positive:
    // exp(2*tanh(x) - 1) = exp(4*sigmoid(2x) - 3), range (e^-3, e), so the
    // regressor can express targets well below and above the nominal
    // quarter-of-crop scale. Decoding clamps to (0, 1].
    let size_map = head_stack(&search_tokens, vars, "size")?
        .scale(2.0)?
        .sigmoid()?
        .scale(4.0)?
        .add_scalar(-3.0)?
        .exp()?
        .transpose()?
        .reshape(&[2, s, s])?;

    let cell = argmax_cell(score_map.data(), s);
    let bbox = decode_box(score_map.data(), offset_map.data(), size_map.data(), s, Some(cell));

    Ok(TrackOutput {
        score_map,
        offset_map,
        size_map,
        features,
        bbox,
        grid: s,
    })
}
