mod common;

use common::{auc_pairs, ks_sweep};
use proptest::prelude::*;
use vintage_core::metrics::{
    auc, ks, psi, three_decile_capture, three_decile_capture_by_score, threshold_for_rate, ScoredSample,
};

/// Scores in [0, 1] on a coarse grid (so ties are common) with both classes.
fn sample() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec((0u32..40).prop_map(|k| k as f64 / 40.0), n),
            prop::collection::vec(0u8..2, n),
        )
            .prop_map(|(s, mut y)| {
                y[0] = 1;
                y[1] = 0;
                (s, y)
            })
    })
}

proptest! {
    #[test]
    fn auc_matches_pair_count((s, y) in sample()) {
        let a = auc(&ScoredSample::new(&s, &y).unwrap()).unwrap();
        prop_assert!((a - auc_pairs(&s, &y)).abs() <= 1e-12);
    }

    #[test]
    fn ks_matches_sweep((s, y) in sample()) {
        prop_assert_eq!(ks(&ScoredSample::new(&s, &y).unwrap()).unwrap(), ks_sweep(&s, &y));
    }

    #[test]
    fn rank_metrics_ignore_monotone_transforms((s, y) in sample()) {
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
        let a = ScoredSample::new(&s, &y).unwrap();
        let b = ScoredSample::new(&t, &y).unwrap();
        prop_assert_eq!(auc(&a).unwrap(), auc(&b).unwrap());
        prop_assert_eq!(ks(&a).unwrap(), ks(&b).unwrap());
        prop_assert_eq!(three_decile_capture(&a).unwrap(), three_decile_capture(&b).unwrap());
    }

    #[test]
    fn flipping_labels_mirrors_auc((s, y) in sample()) {
        let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        let a = auc(&ScoredSample::new(&s, &y).unwrap()).unwrap();
        let b = auc(&ScoredSample::new(&s, &flipped).unwrap()).unwrap();
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn capture_is_a_share_and_ties_only_add((s, y) in sample()) {
        let x = ScoredSample::new(&s, &y).unwrap();
        let rows = three_decile_capture(&x).unwrap();
        let by_score = three_decile_capture_by_score(&x).unwrap();
        prop_assert!((0.0..=1.0).contains(&rows));
        prop_assert!(by_score >= rows);
    }

    #[test]
    fn psi_is_zero_on_itself_and_never_negative(
        a in prop::collection::vec(0.0f64..1.0, 20..200),
        b in prop::collection::vec(0.0f64..1.0, 20..200),
    ) {
        prop_assert_eq!(psi(&a, &a, 10).unwrap(), 0.0);
        prop_assert!(psi(&a, &b, 10).unwrap() >= 0.0);
    }

    #[test]
    fn rate_threshold_flags_the_requested_share(
        s in prop::collection::vec(0.0f64..1.0, 10..300),
        rate in 0.01f64..0.99,
    ) {
        let t = threshold_for_rate(&s, rate).unwrap();
        let k = (rate * s.len() as f64).round() as usize;
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if k == 0 {
            prop_assert!(t > sorted[0]);
        } else {
            prop_assert_eq!(t, sorted[k - 1]);
        }
    }
}
