use super::*;
use crate::autodiff::{primitive_count, reset_primitive_count};
use crate::data::{DataGenConfig, Dataset};
use crate::loss::NormBox;
use crate::model::{argmax_cell, TrackerConfig, TrackerParams};

fn b(cx: f64, cy: f64, w: f64, h: f64) -> NormBox {
    NormBox { cx, cy, w, h }
}

// ── window ───────────────────────────────────────────────────────────

#[test]
fn hann_window_borders_zero_peak_one_symmetric() {
    for s in [3usize, 5, 8, 9] {
        let win = HannWindow::new(s);
        let max = win.weights().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 1.0, "side {s}");
        for i in 0..s {
            assert_eq!(win.at(0, i), 0.0);
            assert_eq!(win.at(s - 1, i), 0.0);
            assert_eq!(win.at(i, 0), 0.0);
            assert_eq!(win.at(i, s - 1), 0.0);
            for j in 0..s {
                assert_eq!(win.at(i, j), win.at(s - 1 - i, j), "flip rows exactly");
                assert_eq!(win.at(i, j), win.at(i, s - 1 - j), "flip cols exactly");
            }
        }
    }
    assert_eq!(HannWindow::new(1).weights(), &[1.0]);
    // Degenerate sides have no interior cells and fall back to flat.
    assert_eq!(HannWindow::new(2).weights(), &[1.0; 4]);
}

#[test]
fn penalize_gamma_zero_is_identity() {
    let win = HannWindow::new(4);
    let score = vec![0.3; 16];
    assert_eq!(penalize(&score, &win, 0.0), score);
}

#[test]
fn penalize_uniform_map_peaks_at_center() {
    let win = HannWindow::new(5);
    let score = vec![0.7; 25];
    let out = penalize(&score, &win, 1.0);
    assert_eq!(argmax_cell(&out, 5), (2, 2));
}

#[test]
fn penalize_moves_argmax_when_window_discounts_enough() {
    // Off-center peak 0.9 at (2,1) where the window is 0.5 (< 8/9), center
    // cell at 0.8: the multiplicative prior moves the argmax to the center.
    let win = HannWindow::new(5);
    assert!((win.at(2, 1) - 0.5).abs() < 1e-15);
    let mut score = vec![0.1; 25];
    score[2 * 5 + 1] = 0.9;
    score[2 * 5 + 2] = 0.8;
    assert_eq!(argmax_cell(&score, 5), (2, 1));
    let out = penalize(&score, &win, 1.0);
    assert_eq!(argmax_cell(&out, 5), (2, 2));
}

#[test]
fn positive_scaling_never_changes_the_penalized_argmax() {
    let win = HannWindow::new(5);
    let score: Vec<f64> = (0..25).map(|i| 0.1 + 0.03 * (i as f64 * 1.37).sin().abs()).collect();
    for gamma in [0.0, 0.3, 1.0] {
        let base = argmax_cell(&penalize(&score, &win, gamma), 5);
        for c in [0.1, 2.0, 117.0] {
            let scaled: Vec<f64> = score.iter().map(|v| v * c).collect();
            assert_eq!(argmax_cell(&penalize(&scaled, &win, gamma), 5), base);
        }
    }
}

// ── metrics ──────────────────────────────────────────────────────────

#[test]
fn perfect_predictions_score_twenty_of_twentyone() {
    let gts = vec![b(0.5, 0.5, 0.2, 0.2); 7];
    let visible = vec![true; 7];
    let auc = success_auc(&gts, &gts, &visible).unwrap();
    // IoU of 1 fails only the strict theta = 1 bound.
    assert!((auc - 20.0 / 21.0).abs() < 1e-12);
}

#[test]
fn disjoint_predictions_score_zero() {
    let preds = vec![b(0.1, 0.1, 0.05, 0.05); 4];
    let gts = vec![b(0.9, 0.9, 0.05, 0.05); 4];
    let auc = success_auc(&preds, &gts, &[true; 4]).unwrap();
    assert_eq!(auc, 0.0, "IoU 0 is not > 0");
}

#[test]
fn iou_exactly_half_passes_ten_thresholds() {
    // Equal squares of side s shifted by s/3 overlap two-thirds of their
    // width, giving IoU = (2/3)/(2 - 2/3) = 0.5. Dyadic values (s = 3/8,
    // shift = 1/8) keep every intermediate exact, so the IoU is exactly 0.5
    // and the strict comparator excludes theta = 0.5 deterministically.
    let s = 0.375;
    let shift = 0.125;
    let a = b(0.5, 0.5, s, s);
    let c = b(0.5 + shift, 0.5, s, s);
    let iou_val = crate::loss::iou(&a, &c);
    assert_eq!(iou_val, 0.5, "constructed IoU {iou_val}");
    let auc = success_auc(&[a], &[c], &[true]).unwrap();
    assert!((auc - 10.0 / 21.0).abs() < 1e-12);
}

#[test]
fn precision_counts_threshold_edge_inclusively() {
    let canvas = 256usize;
    let gts = vec![b(0.5, 0.5, 0.2, 0.2); 3];
    // Exactly 20 px displacement at the reference canvas: still counted.
    let preds = vec![b(0.5 + 20.0 / 256.0, 0.5, 0.2, 0.2); 3];
    let (p, _np) = precision_metrics(&preds, &gts, &[true; 3], canvas).unwrap();
    assert_eq!(p, 1.0);
    // One pixel farther: no longer counted.
    let preds = vec![b(0.5 + 21.0 / 256.0, 0.5, 0.2, 0.2); 3];
    let (p, _np) = precision_metrics(&preds, &gts, &[true; 3], canvas).unwrap();
    assert_eq!(p, 0.0);
}

#[test]
fn precision_threshold_scales_with_canvas() {
    // On a 128 canvas the threshold is 10 px.
    let gts = vec![b(0.5, 0.5, 0.3, 0.3)];
    let preds = vec![b(0.5 + 10.0 / 128.0, 0.5, 0.3, 0.3)];
    let (p, _) = precision_metrics(&preds, &gts, &[true], 128).unwrap();
    assert_eq!(p, 1.0);
    let preds = vec![b(0.5 + 11.0 / 128.0, 0.5, 0.3, 0.3)];
    let (p, _) = precision_metrics(&preds, &gts, &[true], 128).unwrap();
    assert_eq!(p, 0.0);
}

#[test]
fn invisible_frames_never_affect_metrics() {
    let gts = vec![b(0.5, 0.5, 0.2, 0.2), b(0.2, 0.2, 0.2, 0.2)];
    let good = vec![gts[0], gts[0]];
    // Frame 1 is wildly wrong but invisible.
    let auc = success_auc(&good, &gts, &[true, false]).unwrap();
    assert!((auc - 20.0 / 21.0).abs() < 1e-12);
    let (p, np) = precision_metrics(&good, &gts, &[true, false], 128).unwrap();
    assert_eq!(p, 1.0);
    assert!(np > 0.9);
}

#[test]
fn zero_visible_frames_is_undefined() {
    let gts = vec![b(0.5, 0.5, 0.2, 0.2)];
    assert!(matches!(
        success_auc(&gts, &gts, &[false]),
        Err(crate::Error::UndefinedMetric(_))
    ));
    assert!(matches!(
        precision_metrics(&gts, &gts, &[false], 64),
        Err(crate::Error::UndefinedMetric(_))
    ));
}

#[test]
fn aggregate_is_plain_arithmetic_mean() {
    let suite = |name: &str, auc: f64| SuiteResult {
        suite: name.into(),
        trajectories: 3,
        auc,
        precision: 0.5,
        norm_precision: 0.5,
    };
    let r = bench_aggregate(
        vec![suite("a", 0.6), suite("b", 0.5), suite("c", 0.7)],
        "ckpt".into(),
        0.0,
    )
    .unwrap();
    assert!((r.mean_auc - 0.6).abs() < 1e-15);

    let single = bench_aggregate(vec![suite("only", 0.42)], "ckpt".into(), 0.0).unwrap();
    assert_eq!(single.mean_auc, 0.42);

    let permuted = bench_aggregate(
        vec![suite("c", 0.7), suite("a", 0.6), suite("b", 0.5)],
        "ckpt".into(),
        0.0,
    )
    .unwrap();
    assert_eq!(r.mean_auc, permuted.mean_auc);

    assert!(bench_aggregate(vec![], "x".into(), 0.0).is_err());
}

// ── sequence tracking ────────────────────────────────────────────────

fn tiny_tracker() -> (TrackerConfig, TrackerParams) {
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
    let params = TrackerParams::init(&cfg, 77);
    (cfg, params)
}

fn tiny_sequence(seed: u64, frames: usize) -> crate::data::Sequence {
    let gen_cfg = DataGenConfig {
        sequences: 1,
        length: frames,
        canvas: 64,
        occluder_prob: 0.0,
        seed,
        ..DataGenConfig::default()
    };
    Dataset::generate("t", &gen_cfg.specs()).unwrap().sequences.remove(0)
}

#[test]
fn tracking_is_deterministic() {
    let (cfg, params) = tiny_tracker();
    let seq = tiny_sequence(5, 8);
    let infer = InferConfig::default();
    let a = track_sequence(&params, &cfg, &seq, &infer).unwrap();
    let b = track_sequence(&params, &cfg, &seq, &infer).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), seq.len());
    assert_eq!(a[0], seq.boxes[0], "frame 0 echoes the init box");
}

#[test]
fn per_frame_inference_cost_is_constant() {
    let (cfg, params) = tiny_tracker();
    let infer = InferConfig::default();
    let count_for = |frames: usize| {
        let seq = tiny_sequence(9, frames);
        reset_primitive_count();
        track_sequence(&params, &cfg, &seq, &infer).unwrap();
        primitive_count()
    };
    let c2 = count_for(2);
    let c3 = count_for(3);
    let c5 = count_for(5);
    assert_eq!(c3 - c2, (c5 - c3) / 2, "constant primitive count per frame");
    assert!(c3 > c2);
}

#[test]
fn evaluate_produces_report_with_mean() {
    let (cfg, params) = tiny_tracker();
    let gen_cfg = DataGenConfig {
        sequences: 2,
        length: 6,
        canvas: 64,
        occluder_prob: 0.0,
        seed: 3,
        ..DataGenConfig::default()
    };
    let d1 = Dataset::generate("s1", &gen_cfg.specs()).unwrap();
    let d2 = Dataset::generate("s2", &DataGenConfig { seed: 4, ..gen_cfg }.specs()).unwrap();
    let report = evaluate(
        &params,
        &cfg,
        &[("s1".into(), &d1), ("s2".into(), &d2)],
        &InferConfig::default(),
        "test-ckpt",
    )
    .unwrap();
    assert_eq!(report.suites.len(), 2);
    let expected = (report.suites[0].auc + report.suites[1].auc) / 2.0;
    assert_eq!(report.mean_auc, expected);
    let csv = report.to_csv();
    assert!(csv.starts_with("suite,trajectories,auc,precision,norm_precision\n"));
    assert!(csv.trim_end().lines().last().unwrap().starts_with("mean,"));
}
