//! A two-stage growth plan: stage 0 trains a narrow model from scratch;
//! stage 1 widens the model and grows the data, with stage 0's checkpoint as
//! the frozen teacher. Checkpoints, loss curves, and per-stage evaluations
//! land in a run directory.
//!
//! ```bash
//! cargo run --release -p dttrack --example progressive_plan
//! ```

use dttrack::data::DataGenConfig;
use dttrack::eval::InferConfig;
use dttrack::model::TrackerConfig;
use dttrack::scale::{run_plan, GrowthFactor, StagePlan, StageSpec};
use dttrack::train::{DTConfig, Schedule};

fn main() -> dttrack::Result<()> {
    let out = std::env::temp_dir().join("dttrack-example-plan");
    std::fs::remove_dir_all(&out).ok();

    let narrow = TrackerConfig {
        embed_dim: 16,
        num_heads: 2,
        num_layers: 1,
        ..TrackerConfig::default()
    };
    let wide = TrackerConfig {
        embed_dim: 32,
        num_heads: 4,
        num_layers: 2,
        ..narrow
    };
    let data = |name: &str, sequences: usize, seed: u64| DataGenConfig {
        name: name.into(),
        sequences,
        length: 30,
        canvas: 128,
        seed,
        ..DataGenConfig::default()
    };
    let budget = DTConfig {
        total_epochs: 4,
        steps_per_epoch: 15,
        batch_size: 8,
        base_lr: 1e-3,
        ..DTConfig::default()
    };

    let plan = StagePlan {
        seed: 17,
        eval: vec![data("bench", 6, 900)],
        infer: InferConfig::default(),
        stages: vec![
            StageSpec {
                name: Some("seed-model".into()),
                tracker: narrow,
                data: data("stage0", 24, 100),
                train: DTConfig {
                    lambda_transfer: Schedule::Constant { value: 0.0 },
                    lambda_align: 0.0,
                    ..budget.clone()
                },
                teacher: None,
                grows: vec![],
            },
            StageSpec {
                name: Some("grown".into()),
                tracker: wide,
                data: data("stage1", 48, 101),
                train: budget,
                teacher: None, // defaults to the previous stage
                grows: vec![GrowthFactor::Model, GrowthFactor::Data],
            },
        ],
    };

    let outcomes = run_plan(&plan, &out)?;
    println!("plan finished; artifacts in {}", out.display());
    for (i, o) in outcomes.iter().enumerate() {
        println!(
            "  stage {i}: checkpoint {} lineage {:?} mean AUC {:.3}",
            o.checkpoint.id(),
            o.checkpoint.manifest.lineage,
            o.report.mean_auc
        );
    }
    Ok(())
}
