//! Small-teacher transfer: train a narrow model briefly, freeze it, and use
//! it to guide a wider student through output and feature losses (with the
//! width bridged by a trainable adapter).
//!
//! ```bash
//! cargo run --release -p dttrack --example teacher_transfer
//! ```

use dttrack::data::{DataGenConfig, Dataset};
use dttrack::eval::{evaluate, InferConfig};
use dttrack::loss::LayerSelect;
use dttrack::model::{TrackerConfig, TrackerParams};
use dttrack::train::{train, Adapter, DTConfig, Schedule, TeacherHandle};

fn main() -> dttrack::Result<()> {
    let data_cfg = DataGenConfig {
        name: "train".into(),
        sequences: 32,
        length: 30,
        canvas: 128,
        seed: 7,
        ..DataGenConfig::default()
    };
    let data = [Dataset::generate(&data_cfg.name, &data_cfg.specs())?];
    let bench_cfg = DataGenConfig {
        name: "bench".into(),
        sequences: 6,
        length: 24,
        canvas: 128,
        occluder_prob: 0.0,
        seed: 900,
        ..data_cfg.clone()
    };
    let bench = Dataset::generate(&bench_cfg.name, &bench_cfg.specs())?;

    // A narrow teacher, trained briefly without any guidance.
    let teacher_cfg = TrackerConfig {
        embed_dim: 16,
        num_heads: 2,
        num_layers: 1,
        ..TrackerConfig::default()
    };
    let naive = DTConfig {
        total_epochs: 4,
        steps_per_epoch: 15,
        batch_size: 8,
        base_lr: 1e-3,
        lambda_transfer: Schedule::Constant { value: 0.0 },
        lambda_align: 0.0,
        seed: 21,
        ..DTConfig::default()
    };
    println!("training the narrow teacher ({} layers, width {})...", teacher_cfg.num_layers, teacher_cfg.embed_dim);
    let teacher_run = train(&teacher_cfg, TrackerParams::init(&teacher_cfg, 1), None, &data, &naive)?;

    // A wider student guided by the frozen teacher. The adapter projects
    // teacher features into the student's width and trains with the student.
    let student_cfg = TrackerConfig::default();
    let adapter = Adapter::new_if_needed(&teacher_cfg, &student_cfg, &LayerSelect::Last, 3)?;
    println!(
        "adapter needed: {} (teacher width {} -> student width {})",
        adapter.is_some(),
        teacher_cfg.embed_dim,
        student_cfg.embed_dim
    );
    let teacher = TeacherHandle::new(teacher_cfg, teacher_run.params, adapter);
    let digest_before = teacher.digest();

    let dt = DTConfig {
        lambda_transfer: Schedule::StepDrop { before: 0.5, after: 0.0, drop_fraction: 0.9 },
        ..naive
    };
    println!("training the student with transfer...");
    let student_run = train(&student_cfg, TrackerParams::init(&student_cfg, 2), Some(&teacher), &data, &dt)?;
    assert_eq!(teacher.digest(), digest_before, "teacher stays frozen");

    for (epoch, clean, transfer, _a, total) in student_run.log.epoch_means() {
        println!("  epoch {epoch}: clean {clean:7.4}  transfer {transfer:7.4}  total {total:7.4}");
    }

    let report = evaluate(
        &student_run.params,
        &student_cfg,
        &[("bench".into(), &bench)],
        &InferConfig::default(),
        "student",
    )?;
    println!("student bench AUC: {:.3} (teacher parameters untouched)", report.mean_auc);
    Ok(())
}
