//! The benchmark metrics against an independently written brute-force
//! oracle on random trajectory sets.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dttrack::eval::{bench_aggregate, precision_metrics, success_auc, SuiteResult};

#[test]
fn metrics_match_brute_force_oracle_on_random_trajectories() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xfeed);
    for case in 0..100 {
        let (preds, gts, visible) = common::random_trajectory(&mut rng, 20);
        let canvas = 64 + (case % 5) * 48;

        let auc = success_auc(&preds, &gts, &visible).unwrap();
        let auc_oracle = common::oracle_success_auc(&preds, &gts, &visible);
        assert!(
            (auc - auc_oracle).abs() < 1e-9,
            "case {case}: auc {auc} vs oracle {auc_oracle}"
        );

        let (p, np) = precision_metrics(&preds, &gts, &visible, canvas).unwrap();
        let p_oracle = common::oracle_precision(&preds, &gts, &visible, canvas);
        let np_oracle = common::oracle_norm_precision(&preds, &gts, &visible, canvas);
        assert!(
            (p - p_oracle).abs() < 1e-9,
            "case {case}: precision {p} vs oracle {p_oracle}"
        );
        assert!(
            (np - np_oracle).abs() < 1e-9,
            "case {case}: norm precision {np} vs oracle {np_oracle}"
        );
    }
}

#[test]
fn aggregate_mean_is_exact() {
    let suite = |auc: f64| SuiteResult {
        suite: format!("s{auc}"),
        trajectories: 1,
        auc,
        precision: 0.0,
        norm_precision: 0.0,
    };
    let aucs = [0.125, 0.5, 0.625, 0.25];
    let report = bench_aggregate(aucs.iter().map(|a| suite(*a)).collect(), "x".into(), 0.0).unwrap();
    // Dyadic values: the arithmetic mean is exact in binary floating point.
    assert_eq!(report.mean_auc, 0.375);
}
