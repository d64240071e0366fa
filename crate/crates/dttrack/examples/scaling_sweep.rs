//! A one-factor scaling sweep at toy budget: train the same recipe at depths
//! 1 and 2 and compare benchmark scores. The `sweep` subcommand runs the
//! same flow from a config file.
//!
//! ```bash
//! cargo run --release -p dttrack --example scaling_sweep
//! ```

use dttrack::data::{DataGenConfig, Dataset};
use dttrack::eval::{evaluate, InferConfig};
use dttrack::model::{TrackerConfig, TrackerParams};
use dttrack::train::{train, DTConfig, Schedule};

fn main() -> dttrack::Result<()> {
    let data_cfg = DataGenConfig {
        name: "train".into(),
        sequences: 32,
        length: 30,
        canvas: 128,
        seed: 31,
        ..DataGenConfig::default()
    };
    let data = [Dataset::generate(&data_cfg.name, &data_cfg.specs())?];
    let bench_cfg = DataGenConfig {
        name: "bench".into(),
        sequences: 6,
        length: 24,
        canvas: 128,
        occluder_prob: 0.0,
        seed: 902,
        ..data_cfg.clone()
    };
    let bench = Dataset::generate(&bench_cfg.name, &bench_cfg.specs())?;

    let dt = DTConfig {
        total_epochs: 5,
        steps_per_epoch: 15,
        batch_size: 8,
        base_lr: 1e-3,
        lambda_transfer: Schedule::Constant { value: 0.0 },
        lambda_align: 0.0,
        seed: 4,
        ..DTConfig::default()
    };

    println!("factor,value,mean_auc");
    for layers in [1usize, 2] {
        let tracker = TrackerConfig {
            num_layers: layers,
            ..TrackerConfig::default()
        };
        let outcome = train(&tracker, TrackerParams::init(&tracker, 9), None, &data, &dt)?;
        let report = evaluate(
            &outcome.params,
            &tracker,
            &[("bench".into(), &bench)],
            &InferConfig::default(),
            "sweep",
        )?;
        println!("layers,{layers},{:.4}", report.mean_auc);
    }
    println!("(same seed, same data, same budget: only the depth varied)");
    Ok(())
}
