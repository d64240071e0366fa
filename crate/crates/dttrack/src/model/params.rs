//! The named parameter set of the tracker and its initialization.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::autodiff::{Param, ParamSet};

use super::config::TrackerConfig;

/// All learnable tensors of one tracker, keyed by stable names. The set of
/// names and every shape are pure functions of the configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerParams {
    pub set: ParamSet,
}

impl TrackerParams {
    /// Fresh scaled-uniform initialization, deterministic under the seed.
    pub fn init(cfg: &TrackerConfig, seed: u64) -> TrackerParams {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut set = ParamSet::new();
        let d = cfg.embed_dim;
        let patch_in = cfg.patch_size * cfg.patch_size * 3;

        fn linear(
            set: &mut ParamSet,
            name: &str,
            fan_in: usize,
            fan_out: usize,
            rng: &mut ChaCha12Rng,
        ) {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            set.insert(
                format!("{name}.weight"),
                Param::uniform(&[fan_in, fan_out], limit, rng),
            );
            set.insert(format!("{name}.bias"), Param::zeros(&[fan_out]));
        }

        linear(&mut set, "patch_embed", patch_in, d, &mut rng);
        set.insert(
            "pos_embed.template",
            Param::uniform(&[cfg.template_tokens(), d], 0.02, &mut rng),
        );
        set.insert(
            "pos_embed.search",
            Param::uniform(&[cfg.search_tokens(), d], 0.02, &mut rng),
        );
        set.insert("mask_token", Param::uniform(&[d], 0.02, &mut rng));

        // Projections that write into the residual stream start downscaled
        // by 1/sqrt(2 * depth), keeping the initial residual magnitude flat
        // across depths so deeper stacks converge at comparable rates.
        let residual_scale = 1.0 / (2.0 * cfg.num_layers as f64).sqrt();
        for layer in 0..cfg.num_layers {
            let p = |suffix: &str| format!("layers.{layer}.{suffix}");
            set.insert(p("norm1.gain"), Param::filled(1.0, &[d]));
            set.insert(p("norm1.bias"), Param::zeros(&[d]));
            // The key projection carries no bias: a constant added to every
            // key shifts each score row uniformly, which softmax cancels, so
            // the parameter would be a pure null direction.
            for proj in ["attn.q", "attn.v"] {
                linear(&mut set, &p(proj), d, d, &mut rng);
            }
            let limit = (6.0 / (d + d) as f64).sqrt();
            set.insert(p("attn.k.weight"), Param::uniform(&[d, d], limit, &mut rng));
            set.insert(
                p("attn.out.weight"),
                Param::uniform(&[d, d], limit * residual_scale, &mut rng),
            );
            set.insert(p("attn.out.bias"), Param::zeros(&[d]));
            set.insert(p("norm2.gain"), Param::filled(1.0, &[d]));
            set.insert(p("norm2.bias"), Param::zeros(&[d]));
            linear(&mut set, &p("mlp.fc1"), d, cfg.mlp_hidden(), &mut rng);
            let limit = (6.0 / (cfg.mlp_hidden() + d) as f64).sqrt();
            set.insert(
                p("mlp.fc2.weight"),
                Param::uniform(&[cfg.mlp_hidden(), d], limit * residual_scale, &mut rng),
            );
            set.insert(p("mlp.fc2.bias"), Param::zeros(&[d]));
        }

        for (head, out_ch) in [("score", 1usize), ("offset", 2), ("size", 2)] {
            linear(&mut set, &format!("head.{head}.fc1"), d, cfg.head_hidden_dim, &mut rng);
            linear(
                &mut set,
                &format!("head.{head}.fc2"),
                cfg.head_hidden_dim,
                out_ch,
                &mut rng,
            );
        }

        TrackerParams { set }
    }

    pub fn numel(&self) -> usize {
        self.set.numel()
    }

    pub fn digest_hex(&self) -> String {
        self.set.digest_hex()
    }
}
