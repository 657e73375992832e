//! Discrimination, thresholded and monitoring statistics over scored samples.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TimeIndexedDataset;
use crate::learners::ImportanceReport;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a single class")]
    SingleClass,
    #[error("sample has no positives")]
    NoPositives,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("score at row {0} is not finite")]
    NonFiniteScore(usize),
    #[error("fewer than two groups with positives")]
    MissingGroups,
    #[error("bins must be at least 2, got {0}")]
    InvalidBins(usize),
    #[error("threshold must be finite")]
    InvalidThreshold,
    #[error("repeats must be at least 1")]
    InvalidRepeats,
}

/// Scores with their labels and optional group tags, validated on construction.
#[derive(Debug, Clone, Copy)]
pub struct ScoredSample<'a> {
    scores: &'a [f64],
    labels: &'a [u8],
    groups: Option<&'a [u32]>,
}

impl<'a> ScoredSample<'a> {
    pub fn new(scores: &'a [f64], labels: &'a [u8]) -> Result<Self, MetricError> {
        if scores.len() != labels.len() {
            return Err(MetricError::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(MetricError::NonFiniteScore(i));
        }
        Ok(Self {
            scores,
            labels,
            groups: None,
        })
    }

    pub fn with_groups(mut self, groups: &'a [u32]) -> Result<Self, MetricError> {
        if groups.len() != self.scores.len() {
            return Err(MetricError::LengthMismatch {
                scores: self.scores.len(),
                labels: groups.len(),
            });
        }
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &'a [f64] {
        self.scores
    }

    pub fn labels(&self) -> &'a [u8] {
        self.labels
    }

    fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y != 0).count()
    }

    fn class_counts(&self) -> Result<(usize, usize), MetricError> {
        if self.is_empty() {
            return Err(MetricError::EmptySample);
        }
        let p = self.positives();
        if p == 0 || p == self.len() {
            return Err(MetricError::SingleClass);
        }
        Ok((p, self.len() - p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        if self.tp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            return 0.0;
        }
        let (p, r) = (self.precision(), self.recall());
        2.0 * p * r / (p + r)
    }
}

/// Rows with `score >= threshold` are predicted positive.
pub fn confusion(sample: &ScoredSample<'_>, threshold: f64) -> Result<Confusion, MetricError> {
    if sample.is_empty() {
        return Err(MetricError::EmptySample);
    }
    if !threshold.is_finite() {
        return Err(MetricError::InvalidThreshold);
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &y) in sample.scores.iter().zip(sample.labels) {
        match (s >= threshold, y != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn precision(sample: &ScoredSample<'_>, threshold: f64) -> Result<f64, MetricError> {
    Ok(confusion(sample, threshold)?.precision())
}

pub fn recall(sample: &ScoredSample<'_>, threshold: f64) -> Result<f64, MetricError> {
    Ok(confusion(sample, threshold)?.recall())
}

pub fn f1(sample: &ScoredSample<'_>, threshold: f64) -> Result<f64, MetricError> {
    Ok(confusion(sample, threshold)?.f1())
}

/// Groups of tied scores in ascending score order as `(negatives, positives)`.
fn tie_groups(sample: &ScoredSample<'_>) -> Vec<(u64, u64)> {
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| sample.scores[a].total_cmp(&sample.scores[b]));
    let mut groups: Vec<(u64, u64)> = Vec::new();
    let mut last = f64::NAN;
    for i in order {
        let s = sample.scores[i];
        if groups.is_empty() || s != last {
            groups.push((0, 0));
            last = s;
        }
        let g = groups.last_mut().unwrap();
        if sample.labels[i] != 0 {
            g.1 += 1;
        } else {
            g.0 += 1;
        }
    }
    groups
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed with integer pair counts.
pub fn auc(sample: &ScoredSample<'_>) -> Result<f64, MetricError> {
    let (p, n) = sample.class_counts()?;
    let mut below = 0u128;
    let mut twice_credit = 0u128;
    for (neg, pos) in tie_groups(sample) {
        twice_credit += pos as u128 * (2 * below + neg as u128);
        below += neg as u128;
    }
    Ok(twice_credit as f64 / (2.0 * p as f64 * n as f64))
}

/// `max_t |TPR(t) - FPR(t)|` over every score threshold.
pub fn ks(sample: &ScoredSample<'_>) -> Result<f64, MetricError> {
    let (p, n) = sample.class_counts()?;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut best = 0.0f64;
    for (neg, pos) in tie_groups(sample).into_iter().rev() {
        tp += pos;
        fp += neg;
        best = best.max((tp as f64 / p as f64 - fp as f64 / n as f64).abs());
    }
    Ok(best)
}

fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Share of all positives found in the top `ceil(0.3 n)` rows by score;
/// ties keep input order.
pub fn three_decile_capture(sample: &ScoredSample<'_>) -> Result<f64, MetricError> {
    let total = sample.positives();
    if total == 0 {
        return Err(MetricError::NoPositives);
    }
    let k = (3 * sample.len()).div_ceil(10);
    let caught = descending_order(sample.scores)
        .into_iter()
        .take(k)
        .filter(|&i| sample.labels[i] != 0)
        .count();
    Ok(caught as f64 / total as f64)
}

/// Score-quantile variant: every row scoring at or above the row-based cut
/// score is included, so ties at the boundary count in full.
pub fn three_decile_capture_by_score(sample: &ScoredSample<'_>) -> Result<f64, MetricError> {
    let total = sample.positives();
    if total == 0 {
        return Err(MetricError::NoPositives);
    }
    let k = (3 * sample.len()).div_ceil(10);
    let order = descending_order(sample.scores);
    let cut = sample.scores[order[k - 1]];
    let caught = (0..sample.len())
        .filter(|&i| sample.scores[i] >= cut && sample.labels[i] != 0)
        .count();
    Ok(caught as f64 / total as f64)
}

pub const PSI_FLOOR: f64 = 1e-6;

/// `sum (a - e) ln(a / e)` over bins, each proportion floored at [`PSI_FLOOR`].
pub fn psi_from_proportions(expected: &[f64], actual: &[f64]) -> f64 {
    expected
        .iter()
        .zip(actual)
        .map(|(&e, &a)| {
            let (e, a) = (e.max(PSI_FLOOR), a.max(PSI_FLOOR));
            (a - e) * (a / e).ln()
        })
        .sum()
}

/// Bin edges at the `i / bins` quantiles of `expected` (nearest rank).
pub fn quantile_edges(expected: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = expected.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (1..bins).map(|i| sorted[(i * n).div_ceil(bins).max(1) - 1]).collect()
}

fn bin_shares(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0usize; edges.len() + 1];
    for &v in values {
        counts[edges.partition_point(|&e| e < v)] += 1;
    }
    counts.into_iter().map(|c| c as f64 / values.len() as f64).collect()
}

/// Population stability of `actual` against `expected`, with bin edges at
/// the quantiles of `expected`.
pub fn psi(expected: &[f64], actual: &[f64], bins: usize) -> Result<f64, MetricError> {
    if expected.is_empty() || actual.is_empty() {
        return Err(MetricError::EmptySample);
    }
    if bins < 2 {
        return Err(MetricError::InvalidBins(bins));
    }
    let edges = quantile_edges(expected, bins);
    Ok(psi_from_proportions(&bin_shares(expected, &edges), &bin_shares(actual, &edges)).max(0.0))
}

/// Largest pairwise gap in true-positive rate between groups at `threshold`.
/// Groups without positives are skipped.
pub fn equal_opportunity_gap(sample: &ScoredSample<'_>, threshold: f64) -> Result<f64, MetricError> {
    if !threshold.is_finite() {
        return Err(MetricError::InvalidThreshold);
    }
    let groups = sample.groups.ok_or(MetricError::MissingGroups)?;
    let mut per: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for i in 0..sample.len() {
        let e = per.entry(groups[i]).or_default();
        if sample.labels[i] != 0 {
            e.0 += 1;
            if sample.scores[i] >= threshold {
                e.1 += 1;
            }
        }
    }
    if per.len() < 2 {
        return Err(MetricError::MissingGroups);
    }
    let mut rates = Vec::new();
    for (g, (pos, hit)) in per {
        if pos == 0 {
            tracing::warn!(group = g, "group has no positives; skipped in equal-opportunity gap");
        } else {
            rates.push(hit as f64 / pos as f64);
        }
    }
    if rates.len() < 2 {
        return Err(MetricError::MissingGroups);
    }
    let max = rates.iter().copied().fold(f64::MIN, f64::max);
    let min = rates.iter().copied().fold(f64::MAX, f64::min);
    Ok(max - min)
}

/// Cut-off that flags (as near as ties allow) `rate * n` rows as positive:
/// the score of the `round(rate * n)`-th highest row.
pub fn threshold_for_rate(scores: &[f64], rate: f64) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = (rate.clamp(0.0, 1.0) * scores.len() as f64).round() as usize;
    Ok(if k == 0 { sorted[0] + 1.0 } else { sorted[k - 1] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricId {
    Auc,
    Ks,
    ThreeDecileCapture,
}

impl MetricId {
    pub fn compute(self, sample: &ScoredSample<'_>) -> Result<f64, MetricError> {
        match self {
            MetricId::Auc => auc(sample),
            MetricId::Ks => ks(sample),
            MetricId::ThreeDecileCapture => three_decile_capture(sample),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub auc: f64,
    pub ks: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub three_decile_capture: f64,
    pub psi: Option<f64>,
    pub eo_gap: Option<f64>,
    pub threshold: f64,
    pub rows: usize,
    pub bad_rate: f64,
}

/// Full report at `threshold`. PSI is computed against `reference` scores
/// when given; the equal-opportunity gap when the sample carries groups
/// (left empty if fewer than two groups have positives).
pub fn evaluate(
    sample: &ScoredSample<'_>,
    threshold: f64,
    reference: Option<&[f64]>,
) -> Result<MetricReport, MetricError> {
    let c = confusion(sample, threshold)?;
    let eo_gap = match sample.groups {
        Some(_) => match equal_opportunity_gap(sample, threshold) {
            Ok(g) => Some(g),
            Err(MetricError::MissingGroups) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(MetricReport {
        auc: auc(sample)?,
        ks: ks(sample)?,
        f1: c.f1(),
        precision: c.precision(),
        recall: c.recall(),
        three_decile_capture: three_decile_capture(sample)?,
        psi: reference.map(|r| psi(r, sample.scores, 10)).transpose()?,
        eo_gap,
        threshold,
        rows: sample.len(),
        bad_rate: sample.positives() as f64 / sample.len() as f64,
    })
}

/// Mean drop in `metric` when one column at a time is shuffled.
pub fn permutation_importance<F>(
    scorer: F,
    data: &TimeIndexedDataset,
    metric: MetricId,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport, MetricError>
where
    F: Fn(&TimeIndexedDataset) -> Vec<f64>,
{
    if repeats == 0 {
        return Err(MetricError::InvalidRepeats);
    }
    let base_scores = scorer(data);
    let base = metric.compute(&ScoredSample::new(&base_scores, &data.labels)?)?;
    let mut drops = Vec::with_capacity(data.n_features());
    for j in 0..data.n_features() {
        let original = data.column(j);
        let mut shuffled = data.clone();
        let mut total = 0.0;
        for r in 0..repeats {
            let mut col = original.clone();
            col.shuffle(&mut seed::rng(seed::sub_seed(
                seed,
                "permutation",
                r as u32,
                &j.to_string(),
            )));
            for (i, v) in col.into_iter().enumerate() {
                shuffled.set_value(i, j, v);
            }
            let s = scorer(&shuffled);
            total += base - metric.compute(&ScoredSample::new(&s, &data.labels)?)?;
        }
        drops.push(total / repeats as f64);
    }
    Ok(ImportanceReport::from_scores(
        drops
            .into_iter()
            .enumerate()
            .map(|(j, d)| (j, data.feature_names[j].clone(), d)),
    ))
}
