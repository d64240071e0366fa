//! Checks reverse-mode gradients against central differences: first every
//! primitive on small random tensors, then a full tracking loss through the
//! tiny transformer.
//!
//! ```bash
//! cargo run --release -p dttrack --example gradient_check
//! ```

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use dttrack::autodiff::{grad_check, grad_check_params, DiffTensor};
use dttrack::data::Image;
use dttrack::loss::{make_gaussian_target, track_loss, LossWeights, NormBox};
use dttrack::model::{forward, TrackerConfig, TrackerParams};

fn main() -> dttrack::Result<()> {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let point = DiffTensor::constant(
        (0..6).map(|_| rng.random_range(-1.0..1.0)).collect(),
        &[2, 3],
    )?;

    println!("primitive gradient checks (max relative error vs central differences):");
    let cases: Vec<(&str, Box<dyn Fn(&DiffTensor) -> dttrack::Result<DiffTensor>>)> = vec![
        ("multiply + sum", Box::new(|x| x.mul(x)?.sum())),
        ("matmul", Box::new(|x| {
            let w = DiffTensor::constant(vec![0.3, -0.7, 1.2, 0.1, -0.2, 0.9], &[3, 2])?;
            x.matmul(&w)?.mul(&x.matmul(&w)?)?.sum()
        })),
        ("softmax", Box::new(|x| {
            let w = DiffTensor::constant(vec![1.0, -1.0, 2.0, 0.5, 1.5, -0.5], &[2, 3])?;
            x.softmax_last()?.mul(&w)?.sum()
        })),
        ("layer norm", Box::new(|x| {
            let w = DiffTensor::constant(vec![1.0, 2.0, -1.0, 0.5, -2.0, 1.0], &[2, 3])?;
            x.layer_norm_last(1e-5)?.mul(&w)?.sum()
        })),
        ("gelu", Box::new(|x| x.gelu()?.sum())),
        ("sigmoid", Box::new(|x| x.sigmoid()?.mul(x)?.sum())),
    ];
    for (name, f) in &cases {
        let err = grad_check(f, &point, 1e-5)?;
        println!("  {name:12} {err:.3e}");
        assert!(err < 1e-6);
    }

    // End to end: d track_loss / d every model parameter.
    let cfg = TrackerConfig {
        patch_size: 8,
        embed_dim: 8,
        num_layers: 1,
        num_heads: 2,
        mlp_ratio: 2.0,
        template_resolution: 16,
        search_resolution: 32,
        head_hidden_dim: 8,
    };
    let params = TrackerParams::init(&cfg, 3);
    let image = |res: usize, rng: &mut ChaCha12Rng| {
        Image::new(res, res, (0..res * res * 3).map(|_| rng.random_range(0.0..1.0)).collect())
    };
    let template = image(16, &mut rng);
    let search = image(32, &mut rng);
    let gt = NormBox { cx: 0.45, cy: 0.55, w: 0.28, h: 0.22 };
    let target = make_gaussian_target(gt, cfg.grid());

    println!(
        "tracking loss over all {} parameters of a width-8 model...",
        params.numel()
    );
    let err = grad_check_params(
        |vars| {
            let out = forward(vars, &cfg, &template, &search, None, None)?;
            track_loss(&out, &target, gt, &LossWeights::default())
        },
        &params.set,
        1e-5,
    )?;
    println!("  max relative error {err:.3e}");
    assert!(err < 1e-4);
    println!("all gradient checks passed");
    Ok(())
}
