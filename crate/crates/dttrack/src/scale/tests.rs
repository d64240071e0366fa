use super::*;
use crate::data::DataGenConfig;
use crate::eval::InferConfig;
use crate::model::{forward, TrackerConfig, TrackerParams};
use crate::train::{DTConfig, Schedule};

fn tiny_tracker_cfg() -> TrackerConfig {
    TrackerConfig {
        patch_size: 8,
        embed_dim: 8,
        num_layers: 1,
        num_heads: 2,
        mlp_ratio: 2.0,
        template_resolution: 16,
        search_resolution: 32,
        head_hidden_dim: 8,
    }
}

fn quick_data(name: &str, sequences: usize, seed: u64) -> DataGenConfig {
    DataGenConfig {
        name: name.into(),
        sequences,
        length: 10,
        canvas: 64,
        occluder_prob: 0.0,
        seed,
        ..DataGenConfig::default()
    }
}

fn naive_dt() -> DTConfig {
    DTConfig {
        total_epochs: 1,
        steps_per_epoch: 2,
        batch_size: 2,
        lambda_transfer: Schedule::Constant { value: 0.0 },
        lambda_align: 0.0,
        ..DTConfig::default()
    }
}

fn stage(tracker: TrackerConfig, data: DataGenConfig, grows: Vec<GrowthFactor>) -> StageSpec {
    StageSpec {
        name: None,
        tracker,
        data,
        train: naive_dt(),
        teacher: None,
        grows,
    }
}

// ── plan validation ──────────────────────────────────────────────────

#[test]
fn three_stage_data_model_resolution_plan_is_valid() {
    let base = tiny_tracker_cfg();
    let bigger_model = TrackerConfig { embed_dim: 16, num_heads: 4, ..base };
    let higher_res = TrackerConfig {
        template_resolution: 24,
        search_resolution: 48,
        ..bigger_model
    };
    let plan = StagePlan {
        seed: 1,
        eval: vec![quick_data("bench", 2, 99)],
        infer: InferConfig::default(),
        stages: vec![
            stage(base, quick_data("d0", 4, 1), vec![]),
            stage(base, quick_data("d1", 8, 2), vec![GrowthFactor::Data]),
            stage(bigger_model, quick_data("d2", 8, 2), vec![GrowthFactor::Model]),
            stage(higher_res, quick_data("d3", 8, 2), vec![GrowthFactor::Resolution]),
        ],
    };
    assert!(plan_stages(plan).is_ok());
}

#[test]
fn single_stage_plan_without_teacher_is_valid() {
    let plan = StagePlan {
        seed: 2,
        eval: vec![quick_data("bench", 2, 99)],
        infer: InferConfig::default(),
        stages: vec![stage(tiny_tracker_cfg(), quick_data("d0", 4, 1), vec![])],
    };
    let validated = plan_stages(plan).unwrap();
    assert_eq!(validated.stages[0].teacher_source(0), TeacherSource::None);
}

#[test]
fn shrinking_resolution_is_rejected_naming_stage_and_factor() {
    let base = tiny_tracker_cfg();
    let smaller = TrackerConfig {
        template_resolution: 8,
        search_resolution: 16,
        ..base
    };
    let plan = StagePlan {
        seed: 3,
        eval: vec![quick_data("bench", 2, 99)],
        infer: InferConfig::default(),
        stages: vec![
            stage(base, quick_data("d0", 4, 1), vec![]),
            stage(smaller, quick_data("d0", 4, 1), vec![GrowthFactor::Resolution]),
        ],
    };
    let err = plan_stages(plan).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("stage 1") && msg.contains("resolution"), "{msg}");
}

#[test]
fn undeclared_growth_is_rejected() {
    let base = tiny_tracker_cfg();
    let plan = StagePlan {
        seed: 4,
        eval: vec![quick_data("bench", 2, 99)],
        infer: InferConfig::default(),
        stages: vec![
            stage(base, quick_data("d0", 4, 1), vec![]),
            stage(base, quick_data("d1", 8, 2), vec![]),
        ],
    };
    let err = plan_stages(plan).unwrap_err();
    assert!(err.to_string().contains("without being declared"));
}

#[test]
fn later_stages_default_to_previous_stage_teacher() {
    let s = stage(tiny_tracker_cfg(), quick_data("d", 4, 1), vec![]);
    assert_eq!(s.teacher_source(0), TeacherSource::None);
    assert_eq!(s.teacher_source(1), TeacherSource::PreviousStage);
}

// ── checkpoints ──────────────────────────────────────────────────────

fn sample_checkpoint(seed: u64) -> Checkpoint {
    let cfg = tiny_tracker_cfg();
    let params = TrackerParams::init(&cfg, seed);
    Checkpoint::build(
        cfg,
        naive_dt(),
        params,
        None,
        vec![],
        "dataset-digest".into(),
        None,
    )
}

#[test]
fn checkpoint_roundtrip_reproduces_forward_bitwise() {
    let ckpt = sample_checkpoint(21);
    let dir = std::env::temp_dir().join("dttrack-test-ckpt-rt");
    std::fs::remove_dir_all(&dir).ok();
    let manifest_path = ckpt.save(&dir).unwrap();
    let loaded = Checkpoint::load(&manifest_path).unwrap();

    assert_eq!(loaded.manifest, ckpt.manifest);
    assert_eq!(loaded.params.set.digest(), ckpt.params.set.digest());

    let cfg = ckpt.manifest.tracker;
    let mk = |p: &TrackerParams| {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let img = |res: usize, rng: &mut rand_chacha::ChaCha12Rng| {
            crate::data::Image::new(
                res,
                res,
                (0..res * res * 3).map(|_| rng.random_range(0.0..1.0)).collect(),
            )
        };
        let template = img(16, &mut rng);
        let search = img(32, &mut rng);
        let out = forward(&p.set.as_constants(), &cfg, &template, &search, None, None).unwrap();
        out.score_map.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(mk(&ckpt.params), mk(&loaded.params));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn truncated_blob_is_integrity_error() {
    let ckpt = sample_checkpoint(22);
    let dir = std::env::temp_dir().join("dttrack-test-ckpt-trunc");
    std::fs::remove_dir_all(&dir).ok();
    let manifest_path = ckpt.save(&dir).unwrap();
    let bin = dir.join(format!("{}.params.bin", ckpt.id()));
    let bytes = std::fs::read(&bin).unwrap();
    std::fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(
        Checkpoint::load(&manifest_path),
        Err(crate::Error::Integrity(_))
    ));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn corrupted_blob_fails_digest_check() {
    let ckpt = sample_checkpoint(23);
    let dir = std::env::temp_dir().join("dttrack-test-ckpt-corrupt");
    std::fs::remove_dir_all(&dir).ok();
    let manifest_path = ckpt.save(&dir).unwrap();
    let bin = dir.join(format!("{}.params.bin", ckpt.id()));
    let mut bytes = std::fs::read(&bin).unwrap();
    bytes[40] ^= 0xff;
    std::fs::write(&bin, &bytes).unwrap();
    assert!(matches!(
        Checkpoint::load(&manifest_path),
        Err(crate::Error::Integrity(_))
    ));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn digest_changes_iff_parameters_change() {
    let a = sample_checkpoint(24);
    let b = sample_checkpoint(24);
    assert_eq!(a.manifest.params_digest, b.manifest.params_digest);
    assert_eq!(a.id(), b.id());

    let mut changed = sample_checkpoint(24);
    changed.params.set.get_mut("mask_token").unwrap().data[0] += 0.25;
    let rebuilt = Checkpoint::build(
        changed.manifest.tracker,
        naive_dt(),
        changed.params,
        None,
        vec![],
        "dataset-digest".into(),
        None,
    );
    assert_ne!(a.manifest.params_digest, rebuilt.manifest.params_digest);
    assert_ne!(a.id(), rebuilt.id());
}

// ── growth ───────────────────────────────────────────────────────────

#[test]
fn grow_same_config_has_no_adapter_and_equal_counts() {
    let prev = sample_checkpoint(30);
    let spec = stage(tiny_tracker_cfg(), quick_data("d", 4, 1), vec![]);
    let (teacher, student) = grow(&prev, &spec, 7).unwrap();
    assert!(teacher.adapter.is_none());
    assert_eq!(teacher.params.numel(), student.numel());
    assert_eq!(teacher.digest(), prev.params.set.digest());
}

#[test]
fn grow_wider_student_creates_projection() {
    let prev = sample_checkpoint(31);
    let wider = TrackerConfig { embed_dim: 16, num_heads: 4, ..tiny_tracker_cfg() };
    let spec = stage(wider, quick_data("d", 4, 1), vec![GrowthFactor::Model]);
    let (teacher, _student) = grow(&prev, &spec, 8).unwrap();
    let adapter = teacher.adapter.expect("widths differ");
    assert_eq!(
        adapter.params.get("adapter.0.proj").unwrap().shape,
        vec![8, 16]
    );
}

#[test]
fn grow_rejects_shrinking_student() {
    let cfg = TrackerConfig { embed_dim: 16, num_heads: 4, ..tiny_tracker_cfg() };
    let params = TrackerParams::init(&cfg, 1);
    let prev = Checkpoint::build(cfg, naive_dt(), params, None, vec![], "d".into(), None);
    let spec = stage(tiny_tracker_cfg(), quick_data("d", 4, 1), vec![]);
    assert!(grow(&prev, &spec, 9).is_err());
}
