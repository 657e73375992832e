//! Seeded random hyperparameter search scored on the in-time validation split.

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TimeIndexedDataset;
use crate::learners::{self, Family, LearnerConfig, LearnerError, ModelArtifact};
use crate::metrics::{auc, ScoredSample};
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuneError {
    #[error("tuning budget must be at least 1")]
    ZeroBudget,
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("all {trials} {family} trials failed; first error: {first}")]
    AllTrialsFailed {
        family: Family,
        trials: usize,
        first: String,
    },
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "kebab-case")]
pub enum Param {
    Uniform {
        lo: f64,
        hi: f64,
    },
    LogUniform {
        lo: f64,
        hi: f64,
    },
    /// Inclusive integer range.
    Int {
        lo: i64,
        hi: i64,
    },
    Choice {
        values: Vec<f64>,
    },
}

impl Param {
    fn validate(&self) -> Result<(), String> {
        match self {
            Param::Uniform { lo, hi } if lo <= hi && lo.is_finite() && hi.is_finite() => Ok(()),
            Param::LogUniform { lo, hi } if *lo > 0.0 && lo <= hi && hi.is_finite() => Ok(()),
            Param::Int { lo, hi } if lo <= hi => Ok(()),
            Param::Choice { values } if !values.is_empty() => Ok(()),
            Param::LogUniform { .. } => Err("log-scale range must be positive and non-empty".into()),
            _ => Err("range must be non-empty".into()),
        }
    }

    fn sample(&self, rng: &mut seed::Rng) -> f64 {
        match self {
            Param::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Param::LogUniform { lo, hi } => (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp(),
            Param::Int { lo, hi } => rng.random_range(*lo..=*hi) as f64,
            Param::Choice { values } => values[rng.random_range(0..values.len())],
        }
    }
}

/// Named hyperparameter ranges, sampled in declaration order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<(String, Param)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, param: Param) -> Self {
        self.params.push((name.to_string(), param));
        self
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        for (name, p) in &self.params {
            p.validate()
                .map_err(|m| TuneError::InvalidSpace(format!("{name}: {m}")))?;
        }
        Ok(())
    }

    pub fn default_for(family: Family) -> Self {
        use Param::*;
        match family {
            Family::LR => Self::new()
                .with("l1", LogUniform { lo: 1e-5, hi: 3e-2 })
                .with("l2", LogUniform { lo: 1e-5, hi: 1e-1 }),
            Family::RF => Self::new()
                .with("n_trees", Int { lo: 20, hi: 60 })
                .with("max_depth", Int { lo: 4, hi: 10 })
                .with("min_leaf", Int { lo: 5, hi: 100 }),
            Family::GBT => Self::new()
                .with("rounds", Int { lo: 40, hi: 200 })
                .with("learning_rate", LogUniform { lo: 0.02, hi: 0.3 })
                .with("max_depth", Int { lo: 2, hi: 5 })
                .with("lambda", LogUniform { lo: 0.1, hi: 10.0 })
                .with("gamma", Uniform { lo: 0.0, hi: 1.0 })
                .with("min_child_weight", LogUniform { lo: 0.5, hi: 20.0 }),
            Family::MLP => Self::new()
                .with("step_size", LogUniform { lo: 1e-4, hi: 1e-2 })
                .with("epochs", Int { lo: 5, hi: 20 })
                .with(
                    "batch_size",
                    Choice {
                        values: vec![128.0, 256.0, 512.0],
                    },
                )
                .with("dropout", Uniform { lo: 0.0, hi: 0.3 }),
        }
    }

    /// Config for trial `index`: `base` with every parameter resampled from
    /// the trial's own stream, and a trial-specific model seed.
    pub fn sample(&self, base: &LearnerConfig, seed: u64, index: usize) -> Result<LearnerConfig, LearnerError> {
        let mut rng = seed::rng(seed::sub_seed(seed, "trial", index as u32, ""));
        let mut cfg = base.clone();
        for (name, p) in &self.params {
            cfg.set_param(name, p.sample(&mut rng))?;
        }
        Ok(cfg.with_seed(seed::sub_seed(seed, "model", index as u32, "")))
    }
}

pub fn default_budget(family: Family) -> usize {
    match family {
        Family::LR => 20,
        Family::RF => 25,
        Family::GBT => 40,
        Family::MLP => 25,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub index: usize,
    pub config: LearnerConfig,
    /// ITV AUC; `None` when the trial failed.
    pub objective: Option<f64>,
    pub error: Option<String>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: LearnerConfig,
    pub best_index: usize,
    pub best_objective: f64,
    /// The winning trial's model, trained on `train` only.
    pub artifact: ModelArtifact,
    pub trials: Vec<TrialLog>,
}

fn run_trial(
    cfg: &LearnerConfig,
    train: &TimeIndexedDataset,
    itv: &TimeIndexedDataset,
) -> Result<(f64, ModelArtifact), String> {
    let model = learners::train(train, cfg).map_err(|e| e.to_string())?;
    let scores = model.predict_proba(itv).map_err(|e| e.to_string())?;
    let sample = ScoredSample::new(&scores, &itv.labels).map_err(|e| e.to_string())?;
    let v = auc(&sample).map_err(|e| e.to_string())?;
    Ok((v, model))
}

/// Runs `budget` trials and returns the argmax of ITV AUC, ties going to the
/// lowest trial index.
pub fn tune(
    base: &LearnerConfig,
    train: &TimeIndexedDataset,
    itv: &TimeIndexedDataset,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
) -> Result<TuneResult, TuneError> {
    if budget == 0 {
        return Err(TuneError::ZeroBudget);
    }
    space.validate()?;
    base.validate()?;
    let outcomes: Vec<(TrialLog, Option<ModelArtifact>)> = (0..budget)
        .into_par_iter()
        .map(|index| {
            let start = Instant::now();
            let (config, result) = match space.sample(base, seed, index) {
                Ok(cfg) => {
                    let r = run_trial(&cfg, train, itv);
                    (cfg, r)
                }
                Err(e) => (base.clone(), Err(e.to_string())),
            };
            let wall_ms = start.elapsed().as_millis() as u64;
            match result {
                Ok((v, model)) => (
                    TrialLog {
                        index,
                        config,
                        objective: Some(v),
                        error: None,
                        wall_ms,
                    },
                    Some(model),
                ),
                Err(e) => (
                    TrialLog {
                        index,
                        config,
                        objective: None,
                        error: Some(e),
                        wall_ms,
                    },
                    None,
                ),
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (log, _) in &outcomes {
        if let Some(v) = log.objective {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((log.index, v));
            }
        }
    }
    let (trials, mut models): (Vec<TrialLog>, Vec<Option<ModelArtifact>>) = outcomes.into_iter().unzip();
    let Some((best_index, best_objective)) = best else {
        return Err(TuneError::AllTrialsFailed {
            family: base.family(),
            trials: budget,
            first: trials[0].error.clone().unwrap_or_default(),
        });
    };
    Ok(TuneResult {
        best: trials[best_index].config.clone(),
        best_index,
        best_objective,
        artifact: models[best_index].take().expect("successful trial has a model"),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::GbtConfig;

    fn data(seed_: u64, n: usize) -> TimeIndexedDataset {
        let mut rng = seed::rng(seed_);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let labels = rows
            .iter()
            .map(|r| (rng.random::<f64>() < learners::sigmoid(3.0 * r[0])) as u8)
            .collect::<Vec<_>>();
        TimeIndexedDataset::from_rows(&rows, &labels)
    }

    #[test]
    fn budget_one_returns_its_sample() {
        let (tr, itv) = (data(1, 300), data(2, 200));
        let base = LearnerConfig::default_for(Family::LR);
        let space = SearchSpace::default_for(Family::LR);
        let r = tune(&base, &tr, &itv, &space, 1, 9).unwrap();
        assert_eq!(r.best, space.sample(&base, 9, 0).unwrap());
        assert_eq!(r.trials.len(), 1);
    }

    #[test]
    fn deterministic_and_best_of_log() {
        let (tr, itv) = (data(1, 300), data(2, 200));
        let base = LearnerConfig::default_for(Family::LR);
        let space = SearchSpace::default_for(Family::LR);
        let a = tune(&base, &tr, &itv, &space, 5, 4).unwrap();
        let b = tune(&base, &tr, &itv, &space, 5, 4).unwrap();
        assert_eq!(a.best, b.best);
        let cfgs = |r: &TuneResult| r.trials.iter().map(|t| t.config.clone()).collect::<Vec<_>>();
        assert_eq!(cfgs(&a), cfgs(&b));
        let max = a.trials.iter().filter_map(|t| t.objective).fold(f64::MIN, f64::max);
        assert_eq!(a.best_objective, max);
        assert!(a.trials.iter().enumerate().all(|(i, t)| t.index == i));
    }

    #[test]
    fn degenerate_choice_loses() {
        let (tr, itv) = (data(1, 400), data(2, 300));
        let base = LearnerConfig::Gbt(GbtConfig {
            rounds: 20,
            ..GbtConfig::default()
        });
        let space = SearchSpace::new().with("learning_rate", Param::Choice { values: vec![0.0, 0.3] });
        let r = tune(&base, &tr, &itv, &space, 8, 1).unwrap();
        let LearnerConfig::Gbt(c) = &r.best else { unreachable!() };
        assert_eq!(c.learning_rate, 0.3);
        for t in &r.trials {
            let LearnerConfig::Gbt(c) = &t.config else {
                unreachable!()
            };
            if c.learning_rate == 0.0 {
                assert_eq!(t.objective, Some(0.5));
            }
        }
    }

    #[test]
    fn all_failed_is_an_error() {
        let tr = data(1, 100);
        let itv = TimeIndexedDataset::from_rows(&[vec![0.0, 0.0]], &[1]);
        let base = LearnerConfig::default_for(Family::LR);
        let err = tune(&base, &tr, &itv, &SearchSpace::default_for(Family::LR), 2, 0).unwrap_err();
        assert!(matches!(err, TuneError::AllTrialsFailed { trials: 2, .. }));
        assert_eq!(
            tune(&base, &tr, &itv, &SearchSpace::new(), 0, 0).unwrap_err(),
            TuneError::ZeroBudget
        );
    }

    #[test]
    fn log_range_must_be_positive() {
        let s = SearchSpace::new().with("l1", Param::LogUniform { lo: 0.0, hi: 1.0 });
        assert!(matches!(s.validate(), Err(TuneError::InvalidSpace(_))));
    }
}
