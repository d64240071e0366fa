//! The benchmark protocol piece by piece: track one sequence with the
//! Hanning prior, inspect per-frame IoU, then aggregate suites into the
//! benchmark mean score.
//!
//! ```bash
//! cargo run --release -p dttrack --example evaluate_checkpoint
//! ```

use dttrack::data::{DataGenConfig, Dataset};
use dttrack::eval::{
    evaluate, penalize, success_auc, track_sequence, HannWindow, InferConfig,
};
use dttrack::loss::iou;
use dttrack::model::{argmax_cell, TrackerConfig, TrackerParams};
use dttrack::train::{train, DTConfig, Schedule};

fn main() -> dttrack::Result<()> {
    // A quickly trained model; swap in Checkpoint::load for a real run.
    let cfg = TrackerConfig::default();
    let data_cfg = DataGenConfig {
        name: "train".into(),
        sequences: 32,
        length: 30,
        canvas: 128,
        seed: 5,
        ..DataGenConfig::default()
    };
    let data = [Dataset::generate(&data_cfg.name, &data_cfg.specs())?];
    let dt = DTConfig {
        total_epochs: 6,
        steps_per_epoch: 15,
        batch_size: 8,
        base_lr: 1e-3,
        lambda_transfer: Schedule::Constant { value: 0.0 },
        lambda_align: 0.0,
        seed: 2,
        ..DTConfig::default()
    };
    println!("training a quick model...");
    let model = train(&cfg, TrackerParams::init(&cfg, 1), None, &data, &dt)?.params;

    // The Hanning prior in action.
    let window = HannWindow::new(cfg.grid());
    let uniform = vec![0.5; cfg.grid() * cfg.grid()];
    let peaked = penalize(&uniform, &window, 1.0);
    println!(
        "hanning prior: uniform map argmax moves to the center cell {:?}",
        argmax_cell(&peaked, cfg.grid())
    );

    let bench_cfg = DataGenConfig {
        name: "bench".into(),
        sequences: 6,
        length: 24,
        canvas: 128,
        occluder_prob: 0.0,
        seed: 901,
        ..data_cfg
    };
    let bench = Dataset::generate(&bench_cfg.name, &bench_cfg.specs())?;

    let seq = &bench.sequences[0];
    let preds = track_sequence(&model, &cfg, seq, &InferConfig::default())?;
    println!("per-frame IoU on one sequence:");
    for t in (0..seq.len()).step_by(4) {
        println!("  frame {t:2}: IoU {:.3}", iou(&preds[t], &seq.boxes[t]));
    }
    println!(
        "sequence success AUC: {:.3}",
        success_auc(&preds, &seq.boxes, &seq.visible)?
    );

    let report = evaluate(
        &model,
        &cfg,
        &[("bench".into(), &bench)],
        &InferConfig::default(),
        "example",
    )?;
    print!("{}", report.to_csv());
    Ok(())
}
