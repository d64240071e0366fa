//! Plain supervised training of the tiny tracker on synthetic video, then a
//! benchmark evaluation. This is the baseline everything else improves on.
//!
//! ```bash
//! cargo run --release -p dttrack --example train_supervised
//! ```

use dttrack::data::{DataGenConfig, Dataset};
use dttrack::eval::{evaluate, InferConfig};
use dttrack::model::{TrackerConfig, TrackerParams};
use dttrack::train::{train, DTConfig, Schedule};

fn main() -> dttrack::Result<()> {
    let tracker = TrackerConfig::default();
    let dt = DTConfig {
        total_epochs: 8,
        steps_per_epoch: 20,
        batch_size: 8,
        base_lr: 1e-3,
        // Supervised baseline: no teacher, no masked branch.
        lambda_transfer: Schedule::Constant { value: 0.0 },
        lambda_align: 0.0,
        mask_ratio: Schedule::Constant { value: 0.0 },
        seed: 11,
        ..DTConfig::default()
    };

    let data_cfg = DataGenConfig {
        name: "train".into(),
        sequences: 48,
        length: 40,
        canvas: 128,
        seed: 100,
        ..DataGenConfig::default()
    };
    println!("generating {} training sequences...", data_cfg.sequences);
    let data = [Dataset::generate(&data_cfg.name, &data_cfg.specs())?];

    let init = TrackerParams::init(&tracker, 1);
    println!(
        "training {} parameters for {} steps...",
        init.numel(),
        dt.total_epochs * dt.steps_per_epoch
    );
    let outcome = train(&tracker, init, None, &data, &dt)?;
    for (epoch, clean, _t, _a, total) in outcome.log.epoch_means() {
        println!("  epoch {epoch:2}: clean {clean:8.4}  total {total:8.4}");
    }

    let bench_cfg = DataGenConfig {
        name: "bench".into(),
        sequences: 8,
        length: 30,
        canvas: 128,
        occluder_prob: 0.0,
        seed: 900,
        ..DataGenConfig::default()
    };
    let bench = Dataset::generate(&bench_cfg.name, &bench_cfg.specs())?;
    let report = evaluate(
        &outcome.params,
        &tracker,
        &[("bench".into(), &bench)],
        &InferConfig::default(),
        "example",
    )?;
    println!(
        "held-out bench: AUC {:.3}, precision {:.3}, normalized precision {:.3}",
        report.suites[0].auc, report.suites[0].precision, report.suites[0].norm_precision
    );
    Ok(())
}
