//! Binary decision trees and the exact greedy builder shared by the random
//! forest and the boosted ensemble.
//!
//! Candidate thresholds are midpoints between consecutive distinct values
//! inside a node; a row goes left when `value <= threshold`. Among equal
//! gains the lowest feature index wins, then the lowest threshold.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut k = 0usize;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    k = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            _ => None,
        })
    }

    /// Adds each split's gain to its feature's slot.
    pub fn accumulate_gain(&self, into: &mut [f64]) {
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                into[*feature as usize] += gain;
            }
        }
    }
}

/// Midpoint threshold between consecutive distinct values `a < b`, kept
/// strictly below `b` so `b` never routes left.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

/// Per-node sufficient statistics: sample count and two sums (class-1
/// count for Gini; gradient and hessian for second-order boosting).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Stats {
    pub n: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Stats {
    fn add(&mut self, s1: f64, s2: f64) {
        self.n += 1.0;
        self.s1 += s1;
        self.s2 += s2;
    }

    fn minus(&self, other: &Stats) -> Stats {
        Stats {
            n: self.n - other.n,
            s1: self.s1 - other.s1,
            s2: self.s2 - other.s2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Criterion {
    Gini {
        min_leaf: usize,
    },
    SecondOrder {
        lambda: f64,
        gamma: f64,
        min_child_weight: f64,
        learning_rate: f64,
    },
}

impl Criterion {
    fn admissible(&self, left: &Stats, right: &Stats) -> bool {
        match *self {
            Criterion::Gini { min_leaf } => left.n >= min_leaf as f64 && right.n >= min_leaf as f64,
            Criterion::SecondOrder { min_child_weight, .. } => {
                left.s2 >= min_child_weight && right.s2 >= min_child_weight
            }
        }
    }

    fn gain(&self, parent: &Stats, left: &Stats, right: &Stats) -> f64 {
        match *self {
            Criterion::Gini { .. } => super::forest::gini_gain(
                parent.n - parent.s1,
                parent.s1,
                left.n - left.s1,
                left.s1,
                right.n - right.s1,
                right.s1,
            ),
            Criterion::SecondOrder { lambda, gamma, .. } => {
                let score = |s: &Stats| s.s1 * s.s1 / (s.s2 + lambda);
                0.5 * (score(left) + score(right) - score(parent)) - gamma
            }
        }
    }

    fn leaf_value(&self, s: &Stats) -> f64 {
        match *self {
            Criterion::Gini { .. } => s.s1 / s.n,
            Criterion::SecondOrder {
                lambda, learning_rate, ..
            } => {
                let denom = s.s2 + lambda;
                if denom > 0.0 {
                    -learning_rate * s.s1 / denom
                } else {
                    0.0
                }
            }
        }
    }

    fn can_split(&self, s: &Stats) -> bool {
        match *self {
            Criterion::Gini { min_leaf } => s.n >= 2.0 * min_leaf as f64 && s.s1 > 0.0 && s.s1 < s.n,
            Criterion::SecondOrder { .. } => s.n >= 2.0,
        }
    }
}

/// Feature matrix presorted once per fit: for every feature, row indices in
/// ascending value order (ties by row index).
pub(crate) struct Presorted {
    pub cols: Vec<Vec<f64>>,
    pub order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(cols: Vec<Vec<f64>>) -> Self {
        let order = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..c.len() as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { cols, order }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

/// One sample position in a feature's sorted order, with its value and
/// statistics inlined so split scans read memory sequentially.
#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    s1: f64,
    s2: f64,
    pos: u32,
}

pub(crate) struct TreeParams<'a> {
    pub criterion: Criterion,
    pub max_depth: usize,
    /// `Some((p, rng))` draws `p` features per split; `None` scans all.
    pub feature_sampling: Option<(usize, &'a mut Rng)>,
}

/// Grows one tree. `samples` lists the row behind every sample position
/// (rows repeat under bootstrap); `s1`/`s2` are per-position statistics.
pub(crate) fn grow(pre: &Presorted, samples: &[u32], s1: &[f64], s2: &[f64], mut params: TreeParams<'_>) -> Tree {
    let n_features = pre.n_features();
    let m = samples.len();

    // positions of each row, so the global row order yields sorted positions
    let n_rows = pre.cols.first().map_or(0, Vec::len);
    let mut start = vec![0u32; n_rows + 1];
    for &r in samples {
        start[r as usize + 1] += 1;
    }
    for i in 0..n_rows {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut positions = vec![0u32; m];
    for (pos, &r) in samples.iter().enumerate() {
        positions[fill[r as usize] as usize] = pos as u32;
        fill[r as usize] += 1;
    }
    let mut order: Vec<Vec<Entry>> = pre
        .order
        .iter()
        .zip(&pre.cols)
        .map(|(rows, col)| {
            let mut v = Vec::with_capacity(m);
            for &r in rows {
                let r = r as usize;
                for &pos in &positions[start[r] as usize..start[r + 1] as usize] {
                    v.push(Entry {
                        value: col[r],
                        s1: s1[pos as usize],
                        s2: s2[pos as usize],
                        pos,
                    });
                }
            }
            v
        })
        .collect();

    let mut nodes: Vec<Node> = Vec::new();
    let mut goes_left = vec![false; m];
    let mut scratch: Vec<Entry> = Vec::with_capacity(m);
    // (node slot, lo, hi, depth)
    let mut stack = vec![(0usize, 0usize, m, 0usize)];
    nodes.push(Node::Leaf { value: 0.0 });
    let all_features: Vec<usize> = (0..n_features).collect();

    while let Some((slot, lo, hi, depth)) = stack.pop() {
        let mut parent = Stats::default();
        if n_features > 0 {
            for e in &order[0][lo..hi] {
                parent.add(e.s1, e.s2);
            }
        } else {
            for pos in 0..m {
                parent.add(s1[pos], s2[pos]);
            }
        }
        let leaf = Node::Leaf {
            value: params.criterion.leaf_value(&parent),
        };
        if depth >= params.max_depth || n_features == 0 || !params.criterion.can_split(&parent) {
            nodes[slot] = leaf;
            continue;
        }

        let candidates: Vec<usize> = match params.feature_sampling.as_mut() {
            Some((p, rng)) if *p < n_features => {
                let mut f = sample(&mut **rng, n_features, *p).into_vec();
                f.sort_unstable();
                f
            }
            _ => all_features.clone(),
        };

        // (gain, feature, threshold, left count)
        let mut best: Option<(f64, usize, f64, usize)> = None;
        for &f in &candidates {
            let ord = &order[f][lo..hi];
            let mut left = Stats::default();
            for k in 0..ord.len() - 1 {
                let e = &ord[k];
                left.add(e.s1, e.s2);
                let next = ord[k + 1].value;
                if next > e.value {
                    let right = parent.minus(&left);
                    if !params.criterion.admissible(&left, &right) {
                        continue;
                    }
                    let gain = params.criterion.gain(&parent, &left, &right);
                    if best.map_or(true, |b| gain > b.0) {
                        best = Some((gain, f, midpoint(e.value, next), k + 1));
                    }
                }
            }
        }

        let Some((gain, feature, threshold, n_left)) = best.filter(|b| b.0 > 0.0) else {
            nodes[slot] = leaf;
            continue;
        };

        for e in &order[feature][lo..hi] {
            goes_left[e.pos as usize] = e.value <= threshold;
        }
        for ord in order.iter_mut() {
            let seg = &mut ord[lo..hi];
            scratch.clear();
            let mut w = 0;
            for k in 0..seg.len() {
                let e = seg[k];
                if goes_left[e.pos as usize] {
                    seg[w] = e;
                    w += 1;
                } else {
                    scratch.push(e);
                }
            }
            debug_assert_eq!(w, n_left);
            seg[w..].copy_from_slice(&scratch);
        }

        let left_slot = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let right_slot = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: feature as u32,
            threshold,
            left: left_slot as u32,
            right: right_slot as u32,
            gain,
        };
        // right pushed first so the left subtree is numbered first
        stack.push((right_slot, lo + n_left, hi, depth + 1));
        stack.push((left_slot, lo, lo + n_left, depth + 1));
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_stays_below_upper_value() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert!(midpoint(a, b) < b);
    }

    #[test]
    fn routes_on_le() {
        let t = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    gain: 1.0,
                },
                Node::Leaf { value: -1.0 },
                Node::Leaf { value: 1.0 },
            ],
        };
        assert_eq!(t.predict(&[0.5]), -1.0);
        assert_eq!(t.predict(&[0.6]), 1.0);
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn gini_builder_finds_perfect_split() {
        let cols = vec![vec![0.0, 1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0, 5.0]];
        let pre = Presorted::new(cols);
        let s1 = vec![0.0, 0.0, 1.0, 1.0];
        let s2 = vec![0.0; 4];
        let tree = grow(
            &pre,
            &[0, 1, 2, 3],
            &s1,
            &s2,
            TreeParams {
                criterion: Criterion::Gini { min_leaf: 1 },
                max_depth: 3,
                feature_sampling: None,
            },
        );
        assert_eq!(tree.nodes.len(), 3);
        match tree.nodes[0] {
            Node::Split {
                feature,
                threshold,
                gain,
                ..
            } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 1.5);
                assert_eq!(gain, 0.5);
            }
            _ => panic!(),
        }
        assert_eq!(tree.predict(&[0.0, 5.0]), 0.0);
        assert_eq!(tree.predict(&[3.0, 5.0]), 1.0);
    }
}
