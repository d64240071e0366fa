use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::loss::NormBox;
use crate::util::fnv1a;

fn base_spec(seed: u64) -> SequenceSpec {
    SequenceSpec {
        length: 30,
        canvas: 64,
        target: TargetSpec {
            kind: ShapeKind::Disc,
            color: [230, 60, 60],
            size_range: (0.15, 0.25),
        },
        distractors: 2,
        occluder_prob: 0.1,
        motion: MotionSpec {
            speed_range: (1.0, 2.5),
            turn_prob: 0.1,
        },
        seed,
    }
}

#[test]
fn zero_velocity_keeps_boxes_static() {
    let mut spec = base_spec(3);
    spec.motion.speed_range = (0.0, 0.0);
    spec.occluder_prob = 0.0;
    let seq = generate_sequence(&spec).unwrap();
    for b in &seq.boxes {
        assert_eq!(*b, seq.boxes[0]);
    }
}

#[test]
fn zero_occluder_probability_means_always_visible() {
    let mut spec = base_spec(4);
    spec.occluder_prob = 0.0;
    let seq = generate_sequence(&spec).unwrap();
    assert!(seq.visible.iter().all(|v| *v));
    assert!(seq.occluders.iter().all(|o| o.is_none()));
}

#[test]
fn occlusion_rate_matches_binomial_oracle() {
    let mut spec = base_spec(5);
    spec.length = 1000;
    spec.occluder_prob = 0.15;
    let seq = generate_sequence(&spec).unwrap();
    // Frame 0 is never occluded by construction; the trials are frames 1..n.
    let trials = (seq.len() - 1) as f64;
    let occluded = seq.visible[1..].iter().filter(|v| !**v).count() as f64;
    let p = spec.occluder_prob;
    let sigma = (p * (1.0 - p) / trials).sqrt();
    assert!(
        (occluded / trials - p).abs() <= 3.0 * sigma,
        "occluded fraction {} vs p {p}",
        occluded / trials
    );
}

#[test]
fn visibility_is_exactly_the_coverage_rule() {
    let mut spec = base_spec(6);
    spec.length = 400;
    spec.occluder_prob = 0.3;
    let seq = generate_sequence(&spec).unwrap();
    let mut fired = 0;
    for t in 0..seq.len() {
        match &seq.occluders[t] {
            None => assert!(seq.visible[t], "frame {t}: no occluder but invisible"),
            Some(rect) => {
                fired += 1;
                let cov = coverage_from_record(rect, &seq.boxes[t], seq.canvas);
                assert_eq!(
                    seq.visible[t],
                    cov <= 0.5,
                    "frame {t}: coverage {cov} vs visible {}",
                    seq.visible[t]
                );
            }
        }
    }
    assert!(fired > 50, "occluders should fire often at p=0.3, got {fired}");
}

#[test]
fn generation_is_deterministic_and_files_byte_identical() {
    let spec = base_spec(7);
    let a = generate_sequence(&spec).unwrap();
    let b = generate_sequence(&spec).unwrap();
    assert_eq!(a.frames, b.frames);
    assert_eq!(a.boxes, b.boxes);

    let dir = std::env::temp_dir().join("dttrack-test-seq-det");
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("a.seq");
    let p2 = dir.join("b.seq");
    write_sequence(&a, &p1).unwrap();
    write_sequence(&b, &p2).unwrap();
    let f1 = std::fs::read(&p1).unwrap();
    let f2 = std::fs::read(&p2).unwrap();
    assert_eq!(fnv1a(&f1), fnv1a(&f2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn container_roundtrip_is_bitwise() {
    let spec = base_spec(8);
    let seq = generate_sequence(&spec).unwrap();
    let dir = std::env::temp_dir().join("dttrack-test-seq-rt");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("x.seq");
    write_sequence(&seq, &path).unwrap();
    let back = read_sequence(&path).unwrap();
    assert_eq!(back.frames, seq.frames);
    assert_eq!(back.visible, seq.visible);
    for (a, b) in back.boxes.iter().zip(&seq.boxes) {
        assert_eq!(a, b, "shortest round-trip floats are exact");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn truncated_container_is_integrity_error() {
    let spec = base_spec(9);
    let seq = generate_sequence(&spec).unwrap();
    let dir = std::env::temp_dir().join("dttrack-test-seq-trunc");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("x.seq");
    write_sequence(&seq, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..100]).unwrap();
    assert!(matches!(
        read_sequence(&path),
        Err(crate::Error::Integrity(_))
    ));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dataset_build_counts_and_digest_stability() {
    let cfg = DataGenConfig {
        sequences: 8,
        length: 6,
        canvas: 32,
        seed: 11,
        ..DataGenConfig::default()
    };
    let dir = std::env::temp_dir().join("dttrack-test-ds-build");
    std::fs::remove_dir_all(&dir).ok();
    let m1 = build_dataset("t", &cfg.specs(), &dir).unwrap();
    assert_eq!(m1.files.len(), 8);
    let digest1: Vec<u64> = m1
        .files
        .iter()
        .map(|f| fnv1a(&std::fs::read(dir.join(f)).unwrap()))
        .collect();

    std::fs::remove_dir_all(&dir).ok();
    let m2 = build_dataset("t", &cfg.specs(), &dir).unwrap();
    let digest2: Vec<u64> = m2
        .files
        .iter()
        .map(|f| fnv1a(&std::fs::read(dir.join(f)).unwrap()))
        .collect();
    assert_eq!(digest1, digest2);
    assert_eq!(m1.spec_digest, m2.spec_digest);

    let loaded = load_dataset(&dir).unwrap();
    assert_eq!(loaded.len(), 8);

    let double = DataGenConfig { sequences: 16, ..cfg };
    assert_eq!(double.specs().len(), 16);
    std::fs::remove_dir_all(&dir).ok();
}

fn dummy_dataset(name: &str, n: usize) -> Dataset {
    let seq = Sequence {
        canvas: 4,
        frames: vec![vec![0u8; 48]],
        boxes: vec![NormBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 }],
        visible: vec![true],
        occluders: vec![None],
    };
    Dataset {
        manifest: DatasetManifest {
            name: name.into(),
            files: vec![],
            lengths: vec![1; n],
            spec_digest: "0".into(),
        },
        sequences: vec![seq; n],
    }
}

#[test]
fn sampler_single_dataset_always_selected() {
    let ds = [dummy_dataset("only", 5)];
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (d, t) = balanced_sample(&ds, None, &mut rng).unwrap();
        assert_eq!(d, 0);
        assert!(t < 5);
    }
}

#[test]
fn sampler_outer_stage_is_uniform_over_datasets() {
    // Sizes (1000, 10): the outer draw must still split ~50/50.
    let ds = [dummy_dataset("big", 1000), dummy_dataset("small", 10)];
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let n = 10_000;
    let mut counts = [0usize; 2];
    for _ in 0..n {
        let (d, _) = balanced_sample(&ds, None, &mut rng).unwrap();
        counts[d] += 1;
    }
    let half = n as f64 / 2.0;
    for c in counts {
        assert!(
            (c as f64 - half).abs() / half < 0.05,
            "outer split {counts:?} deviates more than 5% from 50/50"
        );
    }
    // Chi-square with df=1: p > 0.01 iff statistic < 6.635.
    let chi2: f64 = counts
        .iter()
        .map(|c| (*c as f64 - half).powi(2) / half)
        .sum();
    assert!(chi2 < 6.635, "chi-square {chi2}");
}

#[test]
fn sampler_respects_configured_weights() {
    let ds = [dummy_dataset("a", 10), dummy_dataset("b", 10)];
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let n = 10_000;
    let weights = [3.0, 1.0];
    let mut counts = [0usize; 2];
    for _ in 0..n {
        let (d, _) = balanced_sample(&ds, Some(&weights), &mut rng).unwrap();
        counts[d] += 1;
    }
    let expected = [n as f64 * 0.75, n as f64 * 0.25];
    let chi2: f64 = counts
        .iter()
        .zip(expected)
        .map(|(c, e)| (*c as f64 - e).powi(2) / e)
        .sum();
    assert!(chi2 < 6.635, "chi-square {chi2} for counts {counts:?}");
}

#[test]
fn sampler_rejects_empty_dataset() {
    let mut empty = dummy_dataset("empty", 1);
    empty.sequences.clear();
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    assert!(balanced_sample(&[empty], None, &mut rng).is_err());
    assert!(balanced_sample(&[], None, &mut rng).is_err());
}

#[test]
fn crop_pair_centers_ground_truth() {
    let mut spec = base_spec(12);
    spec.occluder_prob = 0.0;
    let seq = generate_sequence(&spec).unwrap();
    let pair = crop_pair(&seq, 0, 5, 2.0, 4.0, 32, 64, None).unwrap();
    assert!((pair.gt.cx - 0.5).abs() < 1e-12);
    assert!((pair.gt.cy - 0.5).abs() < 1e-12);
    assert_eq!(pair.template.h, 32);
    assert_eq!(pair.search.h, 64);
    // Search factor 4 on a square-ish target: gt spans about a quarter of it.
    assert!(pair.gt.w > 0.1 && pair.gt.w < 0.5, "gt width {}", pair.gt.w);
}

#[test]
fn crop_pair_skips_invisible_frames() {
    let mut spec = base_spec(13);
    spec.length = 200;
    spec.occluder_prob = 0.5;
    let seq = generate_sequence(&spec).unwrap();
    let t = seq.visible.iter().position(|v| !v).expect("some occluded frame");
    assert!(crop_pair(&seq, 0, t, 2.0, 4.0, 32, 64, None).is_none());
}

#[test]
fn box_mapping_roundtrip_recovers_canvas_box() {
    let window = CropWindow { cx: 40.0, cy: 25.0, side: 37.5 };
    let canvas = 64;
    let b = NormBox { cx: 0.61, cy: 0.43, w: 0.2, h: 0.15 };
    let back = box_to_canvas(&box_to_crop(&b, &window, canvas), &window, canvas);
    // Well within the 1-pixel bound (1/64): the mapping is affine.
    assert!((back.cx - b.cx).abs() < 1e-12);
    assert!((back.cy - b.cy).abs() < 1e-12);
    assert!((back.w - b.w).abs() < 1e-12);
    assert!((back.h - b.h).abs() < 1e-12);
}

#[test]
fn crop_of_uniform_frame_is_uniform() {
    let frame = vec![120u8; 64 * 64 * 3];
    let window = CropWindow { cx: 10.0, cy: 50.0, side: 48.0 };
    let img = crop_at(&frame, 64, &window, 32);
    let expected = 120.0 / 255.0;
    for v in &img.data {
        assert!((v - expected).abs() < 1e-12, "uniform in, uniform out");
    }
}

#[test]
fn default_crop_factors_pinned() {
    assert_eq!(DEFAULT_TEMPLATE_FACTOR, 2.0);
    assert_eq!(DEFAULT_SEARCH_FACTOR, 4.0);
}
