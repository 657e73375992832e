//! Seeded generator of monthly loan-like tables with covariate shift and
//! concept drift.
//!
//! Month `t` draws numeric features from `N(mu0 + t * mean_shift, 1)` and a
//! label from `sigmoid(intercept + beta_t . x + grade effect + noise * e)`
//! with `beta_t = beta_0 + t * coef_drift`. A categorical grade column gains
//! a new level every `churn_every` months. Output is a raw text table with
//! its schema, so it goes through the same ingest path as a loaded file.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnRole, ColumnSchema, ColumnSpec, DatasetError, RawTable};
use crate::learners::sigmoid;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid drift spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftSpec {
    pub rows_per_month: usize,
    pub months: u32,
    /// One entry per numeric feature.
    pub base_coef: Vec<f64>,
    /// Per-month change of each coefficient.
    pub coef_drift: Vec<f64>,
    /// Per-month change of each feature mean, in units of its std.
    pub mean_shift: Vec<f64>,
    /// Number of categorical grade columns.
    pub n_categorical: usize,
    /// Log-odds effect of each initial grade level.
    pub grade_effects: Vec<f64>,
    /// A new grade level appears every this many months (0 = never).
    pub churn_every: u32,
    /// Share of a month's rows taking the newest churned level.
    pub churn_share: f64,
    pub intercept: f64,
    pub noise: f64,
    /// Probability that a cell of the first two numeric features is blank.
    pub missing_rate: f64,
    /// If set, the full drift `coef_drift * (months - 1)` switches on at
    /// this month instead of accruing linearly.
    pub step_at: Option<u32>,
    pub seed: u64,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            rows_per_month: 10_000,
            months: 24,
            base_coef: vec![1.2, -0.9, 0.7, 0.5, -0.4, 0.0, 0.0, 0.0],
            coef_drift: vec![-0.05, 0.035, 0.0, 0.0, 0.0, 0.05, -0.04, 0.0],
            mean_shift: vec![0.02, 0.0, -0.02, 0.0, 0.0, 0.0, 0.0, 0.03],
            n_categorical: 1,
            grade_effects: vec![-0.6, -0.3, 0.0, 0.3, 0.6],
            churn_every: 6,
            churn_share: 0.05,
            intercept: -1.6,
            noise: 0.5,
            missing_rate: 0.02,
            step_at: None,
            seed: 20240601,
        }
    }
}

/// Number of region groups written to the identifier column.
pub const N_REGIONS: u32 = 3;

impl DriftSpec {
    pub fn n_numeric(&self) -> usize {
        self.base_coef.len()
    }

    /// Same spec with every drift rate set to zero.
    pub fn stationary(mut self) -> Self {
        self.coef_drift.iter_mut().for_each(|d| *d = 0.0);
        self.mean_shift.iter_mut().for_each(|d| *d = 0.0);
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.rows_per_month < 50 {
            return bad(format!("rows_per_month {} < 50", self.rows_per_month));
        }
        if self.months < 2 {
            return bad(format!("months {} < 2", self.months));
        }
        let p = self.n_numeric();
        for (name, v) in [("coef_drift", &self.coef_drift), ("mean_shift", &self.mean_shift)] {
            if !v.is_empty() && v.len() != p {
                return bad(format!("{name} has {} entries for {p} features", v.len()));
            }
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.base_coef)
            || !finite(&self.coef_drift)
            || !finite(&self.mean_shift)
            || !finite(&self.grade_effects)
            || !self.intercept.is_finite()
            || !self.noise.is_finite()
        {
            return bad("rates and coefficients must be finite".into());
        }
        if self.n_categorical > 0 && self.grade_effects.is_empty() {
            return bad("grade columns need at least one level".into());
        }
        if !(0.0..1.0).contains(&self.missing_rate) || !(0.0..1.0).contains(&self.churn_share) {
            return bad("missing_rate and churn_share must lie in [0, 1)".into());
        }
        Ok(())
    }

    fn drift_steps(&self, month: u32) -> f64 {
        match self.step_at {
            Some(s) if month >= s => (self.months - 1) as f64,
            Some(_) => 0.0,
            None => month as f64,
        }
    }

    /// True coefficient vector in `month`.
    pub fn coef_at(&self, month: u32) -> Vec<f64> {
        let t = self.drift_steps(month);
        (0..self.n_numeric())
            .map(|j| self.base_coef[j] + t * self.coef_drift.get(j).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn mean_at(&self, month: u32) -> Vec<f64> {
        (0..self.n_numeric())
            .map(|j| month as f64 * self.mean_shift.get(j).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn schema(&self) -> ColumnSchema {
        let mut columns = vec![ColumnSpec {
            name: "loan_id".into(),
            role: ColumnRole::Identifier,
        }];
        columns.push(ColumnSpec {
            name: "month".into(),
            role: ColumnRole::VintageDate,
        });
        columns.extend((0..self.n_numeric()).map(|j| ColumnSpec {
            name: format!("x{j}"),
            role: ColumnRole::FeatureNumeric,
        }));
        columns.extend((0..self.n_categorical).map(|k| ColumnSpec {
            name: format!("grade{k}"),
            role: ColumnRole::FeatureCategorical,
        }));
        columns.push(ColumnSpec {
            name: "region".into(),
            role: ColumnRole::Identifier,
        });
        columns.push(ColumnSpec {
            name: "recoveries".into(),
            role: ColumnRole::LeakageDrop,
        });
        columns.push(ColumnSpec {
            name: "default".into(),
            role: ColumnRole::Label,
        });
        let mut schema = ColumnSchema::new(columns);
        schema.group_column = Some("region".into());
        schema
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub raw: RawTable,
    pub schema: ColumnSchema,
    /// Noise-free log-odds of each row under the true month coefficients.
    pub true_logit: Vec<f64>,
}

fn grade_label(level: usize, base: usize) -> String {
    if level < base {
        ((b'A' + level as u8) as char).to_string()
    } else {
        format!("N{}", level - base + 1)
    }
}

fn normal(rng: &mut seed::Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate(spec: &DriftSpec) -> Result<Synthetic, SynthError> {
    spec.validate()?;
    let p = spec.n_numeric();
    let schema = spec.schema();
    let names: Vec<String> = schema.columns.iter().map(|c| c.name.clone()).collect();
    let n = spec.rows_per_month * spec.months as usize;
    let mut columns: Vec<Vec<Option<String>>> = vec![Vec::with_capacity(n); names.len()];
    let mut true_logit = Vec::with_capacity(n);
    let base_levels = spec.grade_effects.len();
    let mut row_id = 0u64;

    for month in 0..spec.months {
        let mut rng = seed::rng(seed::sub_seed(spec.seed, "synthgen", month, ""));
        let beta = spec.coef_at(month);
        let mu = spec.mean_at(month);
        let churned = if spec.churn_every == 0 {
            0
        } else {
            (month / spec.churn_every) as usize
        };
        for _ in 0..spec.rows_per_month {
            let x: Vec<f64> = (0..p).map(|j| mu[j] + normal(&mut rng)).collect();
            let mut logit = spec.intercept + x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            let mut grades = Vec::with_capacity(spec.n_categorical);
            for _ in 0..spec.n_categorical {
                let level = if churned > 0 && rng.random::<f64>() < spec.churn_share {
                    base_levels + churned - 1
                } else {
                    rng.random_range(0..base_levels)
                };
                // churned levels carry the riskiest base effect
                logit += spec.grade_effects[level.min(base_levels - 1)];
                grades.push(level);
            }
            let region = rng.random_range(0..N_REGIONS);
            let e = normal(&mut rng);
            let y = rng.random::<f64>() < sigmoid(logit + spec.noise * e);
            let recovery = if y {
                rng.random_range(100.0..5000.0f64).round()
            } else {
                0.0
            };
            true_logit.push(logit);

            let mut c = 0;
            let mut put = |v: Option<String>| {
                columns[c].push(v);
                c += 1;
            };
            put(Some(row_id.to_string()));
            put(Some(month.to_string()));
            for (j, v) in x.iter().enumerate() {
                let blank = j < 2 && rng.random::<f64>() < spec.missing_rate;
                put((!blank).then(|| v.to_string()));
            }
            for g in grades {
                put(Some(grade_label(g, base_levels)));
            }
            put(Some(format!("R{region}")));
            put(Some(recovery.to_string()));
            put(Some((y as u8).to_string()));
            row_id += 1;
        }
    }
    Ok(Synthetic {
        raw: RawTable::new(names, columns)?,
        schema,
        true_logit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Table;

    fn small() -> DriftSpec {
        DriftSpec {
            rows_per_month: 200,
            months: 4,
            ..DriftSpec::default()
        }
    }

    #[test]
    fn validates() {
        assert!(generate(&DriftSpec { months: 1, ..small() }).is_err());
        assert!(generate(&DriftSpec {
            rows_per_month: 49,
            ..small()
        })
        .is_err());
        assert!(generate(&DriftSpec {
            coef_drift: vec![f64::NAN; 8],
            ..small()
        })
        .is_err());
    }

    #[test]
    fn shape_and_roles() {
        let s = generate(&small()).unwrap();
        assert_eq!(s.raw.n_rows(), 800);
        let t = Table::from_raw(&s.raw, &s.schema).unwrap();
        assert_eq!(t.features.len(), 9);
        assert!(t.feature("recoveries").is_none());
        assert_eq!(t.horizon(), Some((0, 3)));
        assert!(t.groups.is_some());
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.raw, b.raw);
    }

    #[test]
    fn churn_adds_levels() {
        let spec = DriftSpec {
            rows_per_month: 400,
            months: 13,
            churn_every: 6,
            ..DriftSpec::default()
        };
        let s = generate(&spec).unwrap();
        let grades = s.raw.column("grade0").unwrap();
        let first_n2 = grades.iter().position(|g| g.as_deref() == Some("N2")).unwrap();
        assert!(first_n2 >= 12 * 400);
        assert!(grades[..6 * 400]
            .iter()
            .all(|g| !g.as_deref().unwrap().starts_with('N')));
    }

    #[test]
    fn step_drift_switches_once() {
        let spec = DriftSpec {
            step_at: Some(10),
            ..DriftSpec::default()
        };
        assert_eq!(spec.coef_at(9), spec.base_coef);
        assert_eq!(spec.coef_at(10), spec.coef_at(23));
    }
}
