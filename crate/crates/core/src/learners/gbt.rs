use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, Presorted, Tree, TreeParams};
use super::{log_loss, sigmoid, GbtConfig};
use crate::dataset::TimeIndexedDataset;

/// Additive raw-score model: `sigmoid(base_score + sum_k f_k(x))`, where
/// each stored tree already carries the learning-rate factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booster {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    pub n_features: usize,
    /// Regularised training objective after the base score and after each
    /// accepted round: summed logistic loss plus `gamma * T + lambda/2 * sum w^2`
    /// over the stored leaf scores of every tree so far.
    pub objective_trace: Vec<f64>,
}

pub(crate) fn fit(train: &TimeIndexedDataset, cfg: &GbtConfig) -> Booster {
    let n = train.n_rows();
    let rate = train.bad_rate();
    let base_score = (rate / (1.0 - rate)).ln();
    let mut raw = vec![base_score; n];
    let loss = |raw: &[f64]| -> f64 { train.labels.iter().zip(raw).map(|(&y, &z)| log_loss(y, z)).sum() };

    let mut penalty = 0.0;
    let mut objective = loss(&raw);
    let mut trace = vec![objective];
    let pre = Presorted::new(train.columns());
    let samples: Vec<u32> = (0..n as u32).collect();
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::new();
    let criterion = Criterion::SecondOrder {
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        min_child_weight: cfg.min_child_weight,
        learning_rate: cfg.learning_rate,
    };

    for _ in 0..cfg.rounds {
        for i in 0..n {
            let p = sigmoid(raw[i]);
            grad[i] = p - train.labels[i] as f64;
            hess[i] = p * (1.0 - p);
        }
        let tree = grow(
            &pre,
            &samples,
            &grad,
            &hess,
            TreeParams {
                criterion,
                max_depth: cfg.max_depth,
                feature_sampling: None,
            },
        );
        let next: Vec<f64> = (0..n).map(|i| raw[i] + tree.predict(train.row(i))).collect();
        let omega =
            cfg.gamma * tree.n_leaves() as f64 + 0.5 * cfg.lambda * tree.leaf_values().map(|w| w * w).sum::<f64>();
        let candidate = loss(&next) + penalty + omega;
        // a round that would raise the regularised objective ends boosting
        if candidate > objective {
            break;
        }
        penalty += omega;
        objective = candidate;
        trace.push(objective);
        raw = next;
        trees.push(tree);
    }

    Booster {
        base_score,
        trees,
        n_features: train.n_features(),
        objective_trace: trace,
    }
}

impl Booster {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }

    /// Total split gain per feature.
    pub fn importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for t in &self.trees {
            t.accumulate_gain(&mut imp);
        }
        imp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TimeIndexedDataset {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let labels: Vec<u8> = (0..50).map(|i| (i % 5 == 0) as u8).collect();
        TimeIndexedDataset::from_rows(&rows, &labels)
    }

    #[test]
    fn base_score_is_log_odds() {
        let b = fit(
            &toy(),
            &GbtConfig {
                rounds: 1,
                ..GbtConfig::default()
            },
        );
        assert!((b.base_score - (0.2f64 / 0.8).ln()).abs() < 1e-12);
        assert!((b.base_score + 1.386294).abs() < 1e-6);
    }

    #[test]
    fn zero_learning_rate_keeps_base_score() {
        let b = fit(
            &toy(),
            &GbtConfig {
                rounds: 20,
                learning_rate: 0.0,
                ..GbtConfig::default()
            },
        );
        let d = toy();
        for i in 0..d.n_rows() {
            assert_eq!(b.predict_row(d.row(i)), sigmoid(b.base_score));
        }
    }

    #[test]
    fn huge_gamma_accepts_no_split() {
        let b = fit(
            &toy(),
            &GbtConfig {
                rounds: 10,
                gamma: 1e9,
                ..GbtConfig::default()
            },
        );
        assert!(b.trees.iter().all(|t| t.nodes.len() == 1));
        let d = toy();
        assert_eq!(b.predict_row(d.row(3)), sigmoid(b.base_score));
    }

    #[test]
    fn objective_trace_non_increasing() {
        let b = fit(&toy(), &GbtConfig::default());
        assert!(b.trees.len() > 1);
        for w in b.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }
}
