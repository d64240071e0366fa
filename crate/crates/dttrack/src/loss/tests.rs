use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::autodiff::{
    backward, grad_check, with_precision, DiffTensor, Precision, Tape,
};
use crate::data::Image;
use crate::model::{forward, TrackerConfig, TrackerParams};

fn rand_box(rng: &mut ChaCha12Rng) -> NormBox {
    let w = rng.random_range(0.05..0.6);
    let h = rng.random_range(0.05..0.6);
    NormBox {
        cx: rng.random_range(w / 2.0..1.0 - w / 2.0),
        cy: rng.random_range(h / 2.0..1.0 - h / 2.0),
        w,
        h,
    }
}

// ── gaussian target ──────────────────────────────────────────────────

#[test]
fn gaussian_target_peak_is_exactly_one() {
    let gt = NormBox { cx: 0.37, cy: 0.62, w: 0.2, h: 0.3 };
    let t = make_gaussian_target(gt, 8);
    let peak = t.score[t.cell.0 * 8 + t.cell.1];
    assert_eq!(peak, 1.0);
    assert_eq!(t.score.iter().filter(|v| **v == 1.0).count(), 1);
}

#[test]
fn gaussian_target_symmetric_for_centered_box() {
    // Center of a 5-cell grid: cell (2,2), zero sub-cell offset.
    let gt = NormBox { cx: 0.5, cy: 0.5, w: 0.4, h: 0.4 };
    let t = make_gaussian_target(gt, 5);
    assert_eq!(t.cell, (2, 2));
    for i in 0..5 {
        for j in 0..5 {
            let v = t.score[i * 5 + j];
            assert_eq!(v, t.score[(4 - i) * 5 + j]);
            assert_eq!(v, t.score[i * 5 + (4 - j)]);
        }
    }
}

#[test]
fn gaussian_sigma_hand_evaluated() {
    // w = h = 0.5 on a 16-grid: sigma = max(1, (8 + 8) / 12) = 4/3.
    let gt = NormBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 };
    assert_eq!(TargetMaps::sigma_for(gt, 16), 16.0 / 12.0);
    // Tiny box floors at one cell.
    let small = NormBox { cx: 0.5, cy: 0.5, w: 0.01, h: 0.01 };
    assert_eq!(TargetMaps::sigma_for(small, 16), 1.0);
}

// ── focal ────────────────────────────────────────────────────────────

#[test]
fn focal_perfect_prediction_tends_to_zero() {
    with_precision(Precision::F64, || {
        let gt = NormBox { cx: 0.5, cy: 0.5, w: 0.3, h: 0.3 };
        let t = make_gaussian_target(gt, 4);
        let mut probs = vec![1e-9; 16];
        probs[t.cell.0 * 4 + t.cell.1] = 1.0 - 1e-9;
        let map = DiffTensor::constant(probs, &[4, 4]).unwrap();
        let loss = focal_loss(&map, &t).unwrap().item();
        assert!(loss < 1e-6, "near-perfect prediction, loss {loss}");
    });
}

#[test]
fn focal_hand_evaluated_single_cell() {
    // 1x1 map, target 1, p = 0.5: -(0.5)^2 * ln(0.5) = 0.25 * ln 2.
    with_precision(Precision::F64, || {
        let gt = NormBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 };
        let t = make_gaussian_target(gt, 1);
        let map = DiffTensor::constant(vec![0.5], &[1, 1]).unwrap();
        let loss = focal_loss(&map, &t).unwrap().item();
        assert!((loss - 0.25 * std::f64::consts::LN_2).abs() < 1e-15);
    });
}

#[test]
fn focal_nonnegative_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let gt = rand_box(&mut rng);
        let t = make_gaussian_target(gt, 4);
        let probs: Vec<f64> = (0..16).map(|_| rng.random_range(1e-6..1.0 - 1e-6)).collect();
        let map = DiffTensor::constant(probs, &[4, 4]).unwrap();
        let loss = focal_loss(&map, &t).unwrap().item();
        assert!(loss >= 0.0, "focal loss must be nonnegative, got {loss}");
    }
}

// ── plain box metrics ───────────────────────────────────────────────

#[test]
fn giou_identity_and_loss_zero() {
    let b = NormBox { cx: 0.4, cy: 0.6, w: 0.2, h: 0.1 };
    assert_eq!(giou(&b, &b), 1.0);
    assert_eq!(giou_loss(&b, &b), 0.0);
}

#[test]
fn giou_corner_touching_hand_case() {
    // Unit boxes [0,0,1,1] and [1,1,2,2] on a canvas of 2:
    // IoU 0, union 1/2 of hull, hull the full square -> GIoU = -0.5.
    let a = NormBox { cx: 0.25, cy: 0.25, w: 0.5, h: 0.5 };
    let b = NormBox { cx: 0.75, cy: 0.75, w: 0.5, h: 0.5 };
    assert!((giou(&a, &b) - (-0.5)).abs() < 1e-15);
    assert!((giou_loss(&a, &b) - 1.5).abs() < 1e-15);
}

#[test]
fn giou_symmetric_and_bounded_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..500 {
        let a = rand_box(&mut rng);
        let b = rand_box(&mut rng);
        let g = giou(&a, &b);
        assert_eq!(g, giou(&b, &a));
        assert!((-1.0..=1.0).contains(&g));
        let l = giou_loss(&a, &b);
        assert!((0.0..=2.0).contains(&l));
    }
}

#[test]
fn l1_box_cases() {
    let a = NormBox { cx: 0.5, cy: 0.5, w: 0.2, h: 0.2 };
    assert_eq!(l1_box(&a, &a), 0.0);
    let b = NormBox { cx: 0.7, ..a };
    assert!((l1_box(&a, &b) - 0.05).abs() < 1e-15);
}

#[test]
fn l1_triangle_inequality_on_random_triples() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    for _ in 0..500 {
        let (a, b, c) = (rand_box(&mut rng), rand_box(&mut rng), rand_box(&mut rng));
        assert!(l1_box(&a, &c) <= l1_box(&a, &b) + l1_box(&b, &c) + 1e-12);
    }
}

// ── differentiable box terms ────────────────────────────────────────

#[test]
fn diff_giou_matches_plain_giou() {
    with_precision(Precision::F64, || {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..200 {
            let a = rand_box(&mut rng);
            let b = rand_box(&mut rng);
            let diff = DiffBox {
                cx: DiffTensor::scalar(a.cx),
                cy: DiffTensor::scalar(a.cy),
                w: DiffTensor::scalar(a.w),
                h: DiffTensor::scalar(a.h),
            };
            let via_graph = giou_loss_vs_const(&diff, b).unwrap().item();
            assert!((via_graph - giou_loss(&a, &b)).abs() < 1e-12);
            let l1_graph = l1_vs_const(&diff, b).unwrap().item();
            assert!((l1_graph - l1_box(&a, &b)).abs() < 1e-12);
        }
    });
}

#[test]
fn grad_check_giou_and_l1_terms() {
    // Geometry chosen so every coordinate has a live gradient path through
    // both the intersection and the hull (no exactly-zero directions, which
    // the relative-error form would score as 1 against finite-difference
    // rounding noise).
    let fixed = NormBox { cx: 0.45, cy: 0.55, w: 0.3, h: 0.25 };
    let point = DiffTensor::constant(vec![0.52, 0.48, 0.32, 0.30], &[4]).unwrap();
    let unpack = |x: &DiffTensor| -> crate::Result<DiffBox> {
        Ok(DiffBox {
            cx: x.slice(0, 0, 1)?.reshape(&[])?,
            cy: x.slice(0, 1, 1)?.reshape(&[])?,
            w: x.slice(0, 2, 1)?.reshape(&[])?,
            h: x.slice(0, 3, 1)?.reshape(&[])?,
        })
    };
    let err = grad_check(|x| giou_loss_vs_const(&unpack(x)?, fixed), &point, 1e-6).unwrap();
    assert!(err < 1e-4, "giou grad error {err:.3e}");
    let err = grad_check(|x| l1_vs_const(&unpack(x)?, fixed), &point, 1e-6).unwrap();
    assert!(err < 1e-4, "l1 grad error {err:.3e}");
}

#[test]
fn grad_check_focal_loss() {
    let gt = NormBox { cx: 0.6, cy: 0.4, w: 0.3, h: 0.3 };
    let t = make_gaussian_target(gt, 4);
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let probs: Vec<f64> = (0..16).map(|_| rng.random_range(0.05..0.95)).collect();
    let point = DiffTensor::constant(probs, &[4, 4]).unwrap();
    let err = grad_check(|x| focal_loss(x, &t), &point, 1e-6).unwrap();
    assert!(err < 1e-4, "focal grad error {err:.3e}");
}

// ── feature distance ─────────────────────────────────────────────────

#[test]
fn feature_l2_cases() {
    with_precision(Precision::F64, || {
        let a = DiffTensor::constant(vec![1.0, 2.0], &[1, 2]).unwrap();
        let same = feature_l2(&[a.clone()], &[a.clone()], &LayerSelect::Last)
            .unwrap()
            .item();
        assert_eq!(same, 0.0);

        let b = DiffTensor::constant(vec![1.0, 4.0], &[1, 2]).unwrap();
        let d = feature_l2(&[a], &[b], &LayerSelect::Last).unwrap().item();
        assert_eq!(d, 2.0); // mean(0^2, 2^2)
    });
}

#[test]
fn feature_l2_invariant_under_shared_token_permutation() {
    with_precision(Precision::F64, || {
        let mut rng = ChaCha12Rng::seed_from_u64(30);
        for _ in 0..50 {
            let a: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Permute whole tokens (rows of [4,3]) the same way on both sides.
            let perm = [2usize, 0, 3, 1];
            let permute = |v: &[f64]| -> Vec<f64> {
                perm.iter().flat_map(|r| v[r * 3..r * 3 + 3].to_vec()).collect()
            };
            let t = |v: Vec<f64>| DiffTensor::constant(v, &[4, 3]).unwrap();
            let base = feature_l2(&[t(a.clone())], &[t(b.clone())], &LayerSelect::Last)
                .unwrap()
                .item();
            let perm_val = feature_l2(&[t(permute(&a))], &[t(permute(&b))], &LayerSelect::Last)
                .unwrap()
                .item();
            assert!((base - perm_val).abs() < 1e-12);
        }
    });
}

#[test]
fn feature_l2_shape_mismatch_is_error() {
    let a = DiffTensor::constant(vec![0.0; 6], &[2, 3]).unwrap();
    let b = DiffTensor::constant(vec![0.0; 8], &[2, 4]).unwrap();
    assert!(matches!(
        feature_l2(&[a], &[b], &LayerSelect::Last),
        Err(crate::Error::ShapeMismatch { .. })
    ));
}

// ── track loss and the soft variant ─────────────────────────────────

fn small_forward(seed: u64) -> (TrackerConfig, crate::model::TrackOutput) {
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
    let params = TrackerParams::init(&cfg, seed);
    let vars = params.set.as_constants();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcd);
    let img = |res: usize, rng: &mut ChaCha12Rng| {
        Image::new(res, res, (0..res * res * 3).map(|_| rng.random_range(0.0..1.0)).collect())
    };
    let template = img(16, &mut rng);
    let search = img(32, &mut rng);
    let out = forward(&vars, &cfg, &template, &search, None, None).unwrap();
    (cfg, out)
}

#[test]
fn track_loss_default_weights_pinned() {
    let w = LossWeights::default();
    assert_eq!(w.focal, 1.0);
    assert_eq!(w.iou, 2.0);
    assert_eq!(w.l1, 5.0);
}

#[test]
fn track_loss_recomposition_oracle() {
    // The assembled loss equals focal + 2*(1-GIoU) + 5*L1 recomputed from the
    // same maps by independent plain arithmetic.
    with_precision(Precision::F64, || {
        let (_cfg, out) = small_forward(3);
        let gt = NormBox { cx: 0.55, cy: 0.45, w: 0.3, h: 0.35 };
        let target = make_gaussian_target(gt, out.grid);
        let total = track_loss(&out, &target, gt, &LossWeights::default())
            .unwrap()
            .item();

        let focal = focal_loss(&out.score_map, &target).unwrap().item();
        let cell = target.cell.0 * out.grid + target.cell.1;
        let plane = out.grid * out.grid;
        let s = out.grid as f64;
        let pred = NormBox {
            cx: (target.cell.1 as f64 + out.offset_map.data()[cell]) / s,
            cy: (target.cell.0 as f64 + out.offset_map.data()[plane + cell]) / s,
            w: out.size_map.data()[cell],
            h: out.size_map.data()[plane + cell],
        };
        let expected = focal + 2.0 * giou_loss(&pred, &gt) + 5.0 * l1_box(&pred, &gt);
        assert!((total - expected).abs() < 1e-12, "{total} vs {expected}");
    });
}

#[test]
fn soft_loss_self_reference_floors_at_entropy() {
    with_precision(Precision::F64, || {
        let (_cfg, out) = small_forward(9);
        let loss = soft_track_loss(&out, &out, &LossWeights::default(), true)
            .unwrap()
            .item();
        // Box terms vanish; what remains is the map's own mean entropy.
        let entropy = out
            .score_map
            .data()
            .iter()
            .map(|p| -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()))
            .sum::<f64>()
            / out.score_map.numel() as f64;
        assert!((loss - entropy).abs() < 1e-12, "{loss} vs entropy {entropy}");
    });
}

#[test]
fn soft_loss_sharp_identical_maps_tend_to_zero() {
    with_precision(Precision::F64, || {
        let (_cfg, out) = small_forward(4);
        let grid = out.grid;
        let eps = 1e-12;
        let mut probs = vec![eps; grid * grid];
        probs[5] = 1.0 - eps;
        let sharp = crate::model::TrackOutput {
            score_map: DiffTensor::constant(probs, &[grid, grid]).unwrap(),
            offset_map: out.offset_map.detach(),
            size_map: out.size_map.detach(),
            features: out.features.iter().map(|f| f.detach()).collect(),
            bbox: crate::model::decode_box(
                &{
                    let mut p = vec![eps; grid * grid];
                    p[5] = 1.0 - eps;
                    p
                },
                out.offset_map.data(),
                out.size_map.data(),
                grid,
                None,
            ),
            grid,
        };
        let loss = soft_track_loss(&sharp, &sharp, &LossWeights::default(), true)
            .unwrap()
            .item();
        assert!(loss.abs() < 1e-9, "deterministic map entropy ~ 0, got {loss}");
    });
}

#[test]
fn soft_loss_reference_is_detached() {
    // Reference produced from its own mounted leaves: after backward, those
    // leaves receive exactly zero gradient.
    let (_cfg, student) = small_forward(10);
    let tape = Tape::new();
    let grid = student.grid;
    let n = grid * grid;
    let ref_score_leaf = tape
        .leaf("ref_score", vec![0.4; n], &[grid, grid])
        .unwrap();
    let ref_out = crate::model::TrackOutput {
        score_map: ref_score_leaf.sigmoid().unwrap(),
        offset_map: student.offset_map.detach(),
        size_map: student.size_map.detach(),
        features: student.features.iter().map(|f| f.detach()).collect(),
        bbox: student.bbox,
        grid,
    };
    // Student maps as constants; reference differentiable but detached inside.
    let student_const = crate::model::TrackOutput {
        score_map: student.score_map.detach(),
        offset_map: student.offset_map.detach(),
        size_map: student.size_map.detach(),
        features: student.features.iter().map(|f| f.detach()).collect(),
        bbox: student.bbox,
        grid,
    };
    // The reference's sigmoid participates in the record, so mount a student
    // leaf too to give backward a differentiable path.
    let p_leaf = tape.leaf("student_score", vec![0.0; n], &[grid, grid]).unwrap();
    let student_diff = crate::model::TrackOutput {
        score_map: p_leaf.sigmoid().unwrap(),
        offset_map: student_const.offset_map.clone(),
        size_map: student_const.size_map.clone(),
        features: student_const.features.clone(),
        bbox: student_const.bbox,
        grid,
    };
    let loss = soft_track_loss(&student_diff, &ref_out, &LossWeights::default(), true).unwrap();
    let grads = backward(&loss).unwrap();
    let ref_grad = grads.get("ref_score").unwrap();
    assert!(ref_grad.iter().all(|g| *g == 0.0), "reference must be detached");
    assert!(grads.get("student_score").unwrap().iter().any(|g| *g != 0.0));
}

#[test]
fn soft_loss_grid_mismatch_rejected() {
    let (_c1, a) = small_forward(1);
    let cfg2 = TrackerConfig { search_resolution: 64, template_resolution: 32, ..TrackerConfig::default() };
    let params = TrackerParams::init(&cfg2, 2);
    let vars = params.set.as_constants();
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    let img = |res: usize, rng: &mut ChaCha12Rng| {
        Image::new(res, res, (0..res * res * 3).map(|_| rng.random_range(0.0..1.0)).collect())
    };
    let b = forward(&vars, &cfg2, &img(32, &mut rng), &img(64, &mut rng), None, None).unwrap();
    assert!(matches!(
        soft_track_loss(&a, &b, &LossWeights::default(), true),
        Err(crate::Error::ShapeMismatch { .. })
    ));
}

#[test]
fn track_loss_decreases_monotonically_with_sharpness() {
    // A constructed prediction family: box maps exactly right, score map
    // sharpened toward the one-hot target as k grows. The loss must fall
    // monotonically toward zero.
    with_precision(Precision::F64, || {
        let gt = NormBox { cx: 0.53, cy: 0.41, w: 0.3, h: 0.25 };
        let grid = 8usize;
        let target = make_gaussian_target(gt, grid);
        let plane = grid * grid;

        let mut offset = vec![0.0; 2 * plane];
        let mut size = vec![0.5; 2 * plane];
        let cell = target.cell.0 * grid + target.cell.1;
        offset[cell] = target.offset.0;
        offset[plane + cell] = target.offset.1;
        size[cell] = target.size.0;
        size[plane + cell] = target.size.1;

        let mut last = f64::INFINITY;
        for k in 1..=8u32 {
            let eps = 0.5f64.powi(k as i32);
            let probs: Vec<f64> = target
                .score
                .iter()
                .map(|t| ((1.0 - eps) * t.powi(3 * k as i32)).clamp(1e-300, 1.0 - 1e-12))
                .collect();
            let out = crate::model::TrackOutput {
                score_map: DiffTensor::constant(probs, &[grid, grid]).unwrap(),
                offset_map: DiffTensor::constant(offset.clone(), &[2, grid, grid]).unwrap(),
                size_map: DiffTensor::constant(size.clone(), &[2, grid, grid]).unwrap(),
                features: vec![DiffTensor::full(0.0, &[plane, 4])],
                bbox: gt,
                grid,
            };
            let loss = track_loss(&out, &target, gt, &LossWeights::default())
                .unwrap()
                .item();
            assert!(
                loss < last,
                "sharper prediction must lower the loss: k={k}, {loss} !< {last}"
            );
            last = loss;
        }
        assert!(last < 1e-3, "the limit of the family is a vanishing loss, got {last}");
    });
}
