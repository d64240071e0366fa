//! Shows the dual-branch mechanics in isolation: a clean and a masked view
//! of the same search image pass through shared weights, and the alignment
//! loss measures their divergence as the mask ratio ramps.
//!
//! ```bash
//! cargo run --release -p dttrack --example masked_alignment
//! ```

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use dttrack::data::Image;
use dttrack::loss::{LayerSelect, LossWeights};
use dttrack::model::{TrackerConfig, TrackerParams};
use dttrack::train::{align_loss, dual_branch_forward, MaskSpec, Schedule};

fn main() -> dttrack::Result<()> {
    let cfg = TrackerConfig::default();
    let params = TrackerParams::init(&cfg, 5);
    let vars = params.set.as_constants();

    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let image = |res: usize, rng: &mut ChaCha12Rng| {
        Image::new(res, res, (0..res * res * 3).map(|_| rng.random_range(0.0..1.0)).collect())
    };
    let template = image(cfg.template_resolution, &mut rng);
    let search = image(cfg.search_resolution, &mut rng);

    let schedule = Schedule::Linear { start: 0.05, end: 0.4 };
    let epochs = 8;
    println!("mask ratio ramp and the resulting branch divergence:");
    for epoch in 0..epochs {
        let ratio = schedule.value(epoch, epochs)?;
        let mask = MaskSpec::sample(cfg.search_tokens(), ratio, 100 + epoch as u64)?;
        let (clean, masked) = dual_branch_forward(&vars, &cfg, &template, &search, &mask, None)?;
        let loss = align_loss(&clean, &masked, &LayerSelect::Last, &LossWeights::default(), true)?;
        println!(
            "  epoch {epoch}: ratio {ratio:.3} -> {} of {} patches masked, align loss {:.4}",
            mask.masked_count(),
            mask.len(),
            loss.item()
        );
    }

    // An empty mask collapses the branches exactly.
    let empty = MaskSpec::empty(cfg.search_tokens());
    let (clean, masked) = dual_branch_forward(&vars, &cfg, &template, &search, &empty, None)?;
    assert_eq!(clean.score_map.data(), masked.score_map.data());
    println!("empty mask: branches are bitwise identical");
    Ok(())
}
