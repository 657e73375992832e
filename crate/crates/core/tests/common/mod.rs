//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use rand::Rng as _;
use vintage_core::learners::{split_gain, Node, Tree};
use vintage_core::seed::Rng;

/// Share of (positive, negative) pairs ordered correctly, ties one half.
pub fn auc_pairs(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        if labels[i] == 0 {
            continue;
        }
        for j in 0..scores.len() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// `max |TPR - FPR|` over every threshold `t`, flagging rows with score `>= t`,
/// plus the flag-nothing threshold.
pub fn ks_sweep(scores: &[f64], labels: &[u8]) -> f64 {
    let p = labels.iter().filter(|&&y| y != 0).count();
    let n = labels.len() - p;
    let mut best = 0.0f64;
    for &t in scores {
        let tp = (0..scores.len()).filter(|&i| scores[i] >= t && labels[i] != 0).count();
        let fp = (0..scores.len()).filter(|&i| scores[i] >= t && labels[i] == 0).count();
        best = best.max((tp as f64 / p as f64 - fp as f64 / n as f64).abs());
    }
    best
}

pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn normal(rng: &mut Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Rows with a mix of continuous and heavily tied columns and logistic labels.
pub fn toy_classification(rng: &mut Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d)
            .map(|j| {
                let v = normal(rng);
                if j % 2 == 1 {
                    (v * 2.0).round()
                } else {
                    v
                }
            })
            .collect();
        let z: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>() - 0.5;
        labels.push((rng.random::<f64>() < sigmoid(z)) as u8);
        rows.push(row);
    }
    (rows, labels)
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefNode>,
        right: Box<RefNode>,
    },
}

/// Textbook recursive Gini CART: exhaustive midpoint thresholds, strictly
/// better gain wins, so ties go to the lower feature and then the lower
/// threshold.
pub fn reference_cart(
    rows: &[Vec<f64>],
    labels: &[u8],
    idx: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> RefNode {
    let n = idx.len();
    let pos = idx.iter().filter(|&&i| labels[i] != 0).count();
    let leaf = RefNode::Leaf(pos as f64 / n as f64);
    if depth >= max_depth || n < 2 * min_leaf || pos == 0 || pos == n {
        return leaf;
    }
    let counts = |ix: &[usize]| {
        let p = ix.iter().filter(|&&i| labels[i] != 0).count() as f64;
        [ix.len() as f64 - p, p]
    };
    let parent = counts(idx);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..rows[0].len() {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = midpoint(w[0], w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let gain = split_gain(&parent, &counts(&l), &counts(&r)).unwrap();
            if best.map_or(true, |b| gain > b.0) {
                best = Some((gain, f, t));
            }
        }
    }
    match best {
        Some((gain, f, t)) if gain > 0.0 => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
            RefNode::Split {
                feature: f,
                threshold: t,
                left: Box::new(reference_cart(rows, labels, &l, depth + 1, max_depth, min_leaf)),
                right: Box::new(reference_cart(rows, labels, &r, depth + 1, max_depth, min_leaf)),
            }
        }
        _ => leaf,
    }
}

/// Structural equality of a flat tree (from node `k`) and a reference tree.
pub fn same_tree(tree: &Tree, k: usize, r: &RefNode) -> bool {
    match (&tree.nodes[k], r) {
        (Node::Leaf { value }, RefNode::Leaf(v)) => value == v,
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            },
            RefNode::Split {
                feature: f,
                threshold: t,
                left: l,
                right: rr,
            },
        ) => {
            *feature as usize == *f
                && threshold == t
                && same_tree(tree, *left as usize, l)
                && same_tree(tree, *right as usize, rr)
        }
        _ => false,
    }
}

/// Relative disagreement of an analytic and a numeric derivative.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}
