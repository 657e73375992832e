mod common;

use common::{reference_cart, same_tree, softplus};
use proptest::prelude::*;
use vintage_core::learners::{logistic_objective, train_lr, train_rf, FittedModel, LrConfig, RfConfig};
use vintage_core::TimeIndexedDataset;

/// Small integer-valued rows so equal values and tied gains are frequent.
fn grid_data() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (8usize..60, 1usize..4).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec((0i32..5).prop_map(f64::from), d), n),
            prop::collection::vec(0u8..2, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_tree_matches_reference((rows, labels) in grid_data(), max_depth in 1usize..5, min_leaf in 1usize..6) {
        let data = TimeIndexedDataset::from_rows(&rows, &labels);
        let cfg = RfConfig {
            n_trees: 1,
            bootstrap: false,
            max_features: Some(rows[0].len()),
            max_depth,
            min_leaf,
            seed: 1,
        };
        let art = train_rf(&data, &cfg).unwrap();
        let FittedModel::Rf(forest) = &art.body().model else { panic!("not a forest") };
        let idx: Vec<usize> = (0..rows.len()).collect();
        let reference = reference_cart(&rows, &labels, &idx, 0, max_depth, min_leaf);
        prop_assert!(same_tree(&forest.trees[0], 0, &reference), "{:?}", reference);
    }

    #[test]
    fn forest_scores_are_probabilities((rows, labels) in grid_data(), seed in 0u64..1000) {
        let data = TimeIndexedDataset::from_rows(&rows, &labels);
        let cfg = RfConfig { n_trees: 5, max_depth: 3, min_leaf: 1, seed, ..RfConfig::default() };
        let p = train_rf(&data, &cfg).unwrap().predict_proba(&data).unwrap();
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn logistic_objective_matches_direct_sum(
        (rows, labels) in grid_data(),
        w in prop::collection::vec(-2.0f64..2.0, 3),
        b in -1.0f64..1.0,
        l2 in 0.0f64..0.5,
    ) {
        let d = rows[0].len();
        let w = &w[..d];
        let data = TimeIndexedDataset::from_rows(&rows, &labels);
        let (loss, _, _) = logistic_objective(&data, w, b, l2);
        let n = rows.len() as f64;
        let direct = rows
            .iter()
            .zip(&labels)
            .map(|(x, &y)| {
                let z = b + x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
                softplus(z) - f64::from(y) * z
            })
            .sum::<f64>()
            / n
            + l2 * w.iter().map(|v| v * v).sum::<f64>();
        prop_assert!((loss - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{loss} vs {direct}");
    }

    #[test]
    fn lr_is_invariant_to_row_order((rows, labels) in grid_data()) {
        let mut rev_rows = rows.clone();
        let mut rev_labels = labels.clone();
        rev_rows.reverse();
        rev_labels.reverse();
        let cfg = LrConfig { tol: 1e-12, max_iter: 5000, ..LrConfig::default() };
        let a = train_lr(&TimeIndexedDataset::from_rows(&rows, &labels), &cfg).unwrap();
        let b = train_lr(&TimeIndexedDataset::from_rows(&rev_rows, &rev_labels), &cfg).unwrap();
        let probe = TimeIndexedDataset::from_rows(&rows, &labels);
        let (pa, pb) = (a.predict_proba(&probe).unwrap(), b.predict_proba(&probe).unwrap());
        for (x, y) in pa.iter().zip(&pb) {
            prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
    }
}
