use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, Presorted, Tree, TreeParams};
use super::{LearnerError, RfConfig};
use crate::dataset::TimeIndexedDataset;
use crate::seed;

/// Gini impurity `1 - sum_c p_c^2` of a class-count vector.
pub fn gini(counts: &[f64]) -> Result<f64, LearnerError> {
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(LearnerError::EmptyNode);
    }
    Ok(1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>())
}

/// Impurity decrease `G(P) - |L|/|P| G(L) - |R|/|P| G(R)` of a split.
pub fn split_gain(parent: &[f64], left: &[f64], right: &[f64]) -> Result<f64, LearnerError> {
    if parent.len() != left.len()
        || parent.len() != right.len()
        || parent.iter().zip(left.iter().zip(right)).any(|(p, (l, r))| l + r != *p)
    {
        return Err(LearnerError::InconsistentCounts);
    }
    let np: f64 = parent.iter().sum();
    let nl: f64 = left.iter().sum();
    let nr: f64 = right.iter().sum();
    if !(np > 0.0) {
        return Err(LearnerError::EmptyNode);
    }
    let g = |c: &[f64], n: f64| if n > 0.0 { gini(c) } else { Ok(0.0) };
    Ok(g(parent, np)? - (nl / np) * g(left, nl)? - (nr / np) * g(right, nr)?)
}

fn gini2(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n > 0.0 {
        1.0 - ((c0 / n) * (c0 / n) + (c1 / n) * (c1 / n))
    } else {
        0.0
    }
}

/// Binary-class split gain from raw counts; same arithmetic as
/// [`split_gain`] on two-class vectors.
pub(crate) fn gini_gain(p0: f64, p1: f64, l0: f64, l1: f64, r0: f64, r1: f64) -> f64 {
    let np = p0 + p1;
    let nl = l0 + l1;
    let nr = r0 + r1;
    gini2(p0, p1) - (nl / np) * gini2(l0, l1) - (nr / np) * gini2(r0, r1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_features: usize,
}

pub(crate) fn fit(train: &TimeIndexedDataset, cfg: &RfConfig) -> Forest {
    let n = train.n_rows();
    let n_features = train.n_features();
    let p = cfg
        .max_features
        .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
        .clamp(1, n_features.max(1));
    let pre = Presorted::new(train.columns());
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::stream(cfg.seed, k as u64);
            let samples: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            let s1: Vec<f64> = samples.iter().map(|&r| train.labels[r as usize] as f64).collect();
            let s2 = vec![0.0; samples.len()];
            grow(
                &pre,
                &samples,
                &s1,
                &s2,
                TreeParams {
                    criterion: Criterion::Gini { min_leaf: cfg.min_leaf },
                    max_depth: cfg.max_depth,
                    feature_sampling: Some((p, &mut rng)),
                },
            )
        })
        .collect();
    Forest { trees, n_features }
}

impl Forest {
    /// Mean of per-tree leaf class-1 frequencies.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean over trees of the summed impurity decreases per feature.
    pub fn importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for t in &self.trees {
            t.accumulate_gain(&mut imp);
        }
        let k = self.trees.len() as f64;
        imp.iter_mut().for_each(|v| *v /= k);
        imp
    }
}
