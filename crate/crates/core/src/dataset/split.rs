use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DatasetError, Table, TimeIndexedDataset};
use crate::seed;

/// Inclusive month range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonthWindow {
    pub start: u32,
    pub end: u32,
}

impl MonthWindow {
    pub const fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, month: u32) -> bool {
        (self.start..=self.end).contains(&month)
    }

    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn shifted(&self, by: u32) -> Self {
        Self::new(self.start + by, self.end + by)
    }
}

impl fmt::Display for MonthWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Anything rows can be cut from by vintage and stratified by label.
pub trait Vintaged {
    fn n_rows(&self) -> usize;
    fn vintage(&self, row: usize) -> u32;
    fn label(&self, row: usize) -> u8;

    fn rows_in(&self, window: MonthWindow) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| window.contains(self.vintage(i)))
            .collect()
    }

    fn horizon(&self) -> Option<(u32, u32)> {
        (0..self.n_rows())
            .map(|i| self.vintage(i))
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}

impl Vintaged for Table {
    fn n_rows(&self) -> usize {
        self.labels.len()
    }
    fn vintage(&self, row: usize) -> u32 {
        self.vintage[row]
    }
    fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }
}

impl Vintaged for TimeIndexedDataset {
    fn n_rows(&self) -> usize {
        self.labels.len()
    }
    fn vintage(&self, row: usize) -> u32 {
        self.vintage[row]
    }
    fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub dev: MonthWindow,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub otv: MonthWindow,
    pub prod: Vec<MonthWindow>,
    /// Label observation gap in months between OTV end and PROD start.
    pub gap: u32,
}

fn default_train_fraction() -> f64 {
    0.75
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(DatasetError::InvalidSplit(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        for (name, w) in self.named_windows() {
            if w.is_empty() {
                return Err(DatasetError::InvalidSplit(format!(
                    "{name} window {w} ends before it starts"
                )));
            }
        }
        let first = self
            .prod
            .first()
            .ok_or_else(|| DatasetError::InvalidSplit("no PROD windows".into()))?;
        if self.otv.end + self.gap > first.start {
            return Err(DatasetError::GapViolation {
                otv_end: self.otv.end,
                gap: self.gap,
                prod_start: first.start,
            });
        }
        for pair in self.prod.windows(2) {
            if pair[1].start <= pair[0].end {
                return Err(DatasetError::InvalidSplit(format!(
                    "PROD windows {} and {} overlap or are out of order",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    pub fn check_horizon(&self, horizon: (u32, u32)) -> Result<(), DatasetError> {
        for (name, w) in self.named_windows() {
            if w.start < horizon.0 || w.end > horizon.1 {
                return Err(DatasetError::OutsideHorizon {
                    window: format!("{name} {w}"),
                    horizon_start: horizon.0,
                    horizon_end: horizon.1,
                });
            }
        }
        Ok(())
    }

    fn named_windows(&self) -> Vec<(String, MonthWindow)> {
        let mut v = vec![("dev".to_string(), self.dev), ("otv".to_string(), self.otv)];
        v.extend(self.prod.iter().enumerate().map(|(i, w)| (format!("prod[{i}]"), *w)));
        v
    }
}

/// Row indices of each split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub itv: Vec<usize>,
    pub otv: Vec<usize>,
    pub prod: Vec<Vec<usize>>,
}

pub fn split<D: Vintaged>(data: &D, spec: &SplitSpec, seed: u64) -> Result<Splits, DatasetError> {
    spec.validate()?;
    let horizon = data
        .horizon()
        .ok_or_else(|| DatasetError::EmptyWindow("dataset".into()))?;
    spec.check_horizon(horizon)?;
    let nonempty = |name: String, rows: Vec<usize>| {
        if rows.is_empty() {
            Err(DatasetError::EmptyWindow(name))
        } else {
            Ok(rows)
        }
    };
    let dev = nonempty(format!("dev {}", spec.dev), data.rows_in(spec.dev))?;
    let (train, itv) = partition_dev(data, &dev, spec.train_fraction, seed);
    let otv = nonempty(format!("otv {}", spec.otv), data.rows_in(spec.otv))?;
    let prod = spec
        .prod
        .iter()
        .enumerate()
        .map(|(i, w)| nonempty(format!("prod[{i}] {w}"), data.rows_in(*w)))
        .collect::<Result<_, _>>()?;
    Ok(Splits { train, itv, otv, prod })
}

/// Label-stratified seeded partition of `rows` into (train, itv). The train
/// share is `round(fraction * n)` rows exactly, allocated over the two
/// classes by largest remainder. Both outputs are sorted.
pub fn partition_dev<D: Vintaged>(data: &D, rows: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed);
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for &r in rows {
        classes[(data.label(r) != 0) as usize].push(r);
    }
    for c in classes.iter_mut() {
        c.shuffle(&mut rng);
    }
    let target = (fraction * rows.len() as f64).round() as usize;
    let exact: Vec<f64> = classes.iter().map(|c| fraction * c.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(quota.iter().sum());
    for &c in order.iter().cycle().take(4) {
        if remaining == 0 {
            break;
        }
        if quota[c] < classes[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    let mut train = Vec::with_capacity(target);
    let mut itv = Vec::with_capacity(rows.len() - target);
    for (c, rows) in classes.iter().enumerate() {
        train.extend_from_slice(&rows[..quota[c]]);
        itv.extend_from_slice(&rows[quota[c]..]);
    }
    train.sort_unstable();
    itv.sort_unstable();
    (train, itv)
}
