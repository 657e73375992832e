//! The champion-challenger replay loop.
//!
//! Period 0 trains one fixed-window model per family and crowns the best on
//! the OTV window; that model is also frozen as the baseline. Each later
//! period re-scores the incumbent on the period's (shifted) OTV window,
//! rebuilds every family under each retraining strategy, promotes a
//! challenger whose OTV AUC is strictly higher, and scores the period's
//! production slice with both the champion and the baseline.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    apply_preprocess, fit_preprocess, partition_dev, train_slice, DatasetError, MonthWindow, PreprocessPlan, SplitSpec,
    Strategy, Table, TimeIndexedDataset, Vintaged, WindowSpec,
};
use crate::hash::{ContentHash, Hasher};
use crate::learners::{Family, FittedModel, LearnerConfig, ModelArtifact, Provenance};
use crate::metrics::{evaluate, threshold_for_rate, MetricError, MetricReport, ScoredSample};
use crate::registry::{Registry, RegistryError, RunId, RunRecord};
use crate::seed;
use crate::tuner::{default_budget, tune, SearchSpace, TrialLog};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayErrorKind {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("no candidate could be trained: {0}")]
    NoViableCandidate(String),
}

/// A fatal replay failure, naming the period it happened in and the last
/// period that completed.
#[derive(Debug, Error, Clone, PartialEq)]
pub struct ReplayError {
    pub period: u32,
    pub last_completed: Option<u32>,
    #[source]
    pub kind: ReplayErrorKind,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "period {}: {}", self.period, self.kind)?;
        match self.last_completed {
            Some(p) => write!(f, " (last completed period {p})"),
            None => write!(f, " (no period completed)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplaySchedule {
    pub periods: u32,
    /// Months of new data released per period.
    pub release_width: u32,
    pub families: Vec<Family>,
    /// Challenger retraining strategies used after period 0.
    pub strategies: Vec<Strategy>,
    /// Trial budget per family; missing entries use the tuner defaults.
    pub budgets: BTreeMap<Family, usize>,
    /// Starting config per family; missing entries use the learner defaults.
    pub base_configs: BTreeMap<Family, LearnerConfig>,
    pub spaces: BTreeMap<Family, SearchSpace>,
    /// Fixed threshold for F1 and friends. When absent, each sample is cut at
    /// the score quantile that flags the model's training bad rate.
    pub threshold: Option<f64>,
}

impl Default for ReplaySchedule {
    fn default() -> Self {
        Self {
            periods: 12,
            release_width: 1,
            families: Family::ALL.to_vec(),
            strategies: vec![Strategy::FixedOrigin, Strategy::RollingWindow],
            budgets: BTreeMap::new(),
            base_configs: BTreeMap::new(),
            spaces: BTreeMap::new(),
            threshold: None,
        }
    }
}

impl ReplaySchedule {
    pub fn budget(&self, f: Family) -> usize {
        self.budgets.get(&f).copied().unwrap_or_else(|| default_budget(f))
    }

    pub fn base_config(&self, f: Family) -> LearnerConfig {
        self.base_configs
            .get(&f)
            .cloned()
            .unwrap_or_else(|| LearnerConfig::default_for(f))
    }

    pub fn space(&self, f: Family) -> SearchSpace {
        self.spaces
            .get(&f)
            .cloned()
            .unwrap_or_else(|| SearchSpace::default_for(f))
    }

    pub fn validate(&self) -> Result<(), ReplayErrorKind> {
        let bad = |m: &str| Err(ReplayErrorKind::InvalidSchedule(m.to_string()));
        if self.periods == 0 {
            return bad("periods must be at least 1");
        }
        if self.release_width == 0 {
            return bad("release width must be at least 1");
        }
        if self.families.is_empty() {
            return bad("no challenger families");
        }
        if self.strategies.contains(&Strategy::FixedWindow) {
            return bad("fixed-window is the baseline, not a challenger strategy");
        }
        for (f, cfg) in &self.base_configs {
            if cfg.family() != *f {
                return bad("base config family does not match its key");
            }
        }
        Ok(())
    }
}

/// `GBT^RW_M3` style name: family, strategy code, 1-based period.
pub fn candidate_name(family: Family, strategy: Strategy, period: u32) -> String {
    format!("{family}^{}_M{}", strategy.code(), period + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Promotion {
    pub period: u32,
    pub candidate: String,
    pub score: f64,
    pub strategy: Strategy,
}

/// Champion bookkeeping: `M*` and `S*`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChampionState {
    pub champion: Option<String>,
    pub score: f64,
    pub history: Vec<Promotion>,
}

impl ChampionState {
    /// No champion, score 0.
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces `S*` with the incumbent's score on the current OTV window.
    pub fn reevaluate(&mut self, score: f64) {
        if self.champion.is_some() {
            self.score = score;
        }
    }

    /// Promotes the challenger iff its score is strictly above `S*`.
    pub fn consider(&mut self, period: u32, candidate: &str, strategy: Strategy, score: f64) -> bool {
        if score > self.score {
            self.champion = Some(candidate.to_string());
            self.score = score;
            self.history.push(Promotion {
                period,
                candidate: candidate.to_string(),
                score,
                strategy,
            });
            true
        } else {
            false
        }
    }
}

/// Arg-max of OTV objective; equal scores go to the earlier family in
/// LR, RF, GBT, MLP order, then to the earlier list position.
pub fn select_initial_champion(candidates: &[(String, Family, f64)]) -> Result<ChampionState, ReplayErrorKind> {
    if candidates.is_empty() {
        return Err(ReplayErrorKind::NoViableCandidate("empty candidate list".into()));
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| candidates[i].1);
    let mut state = ChampionState::new();
    for i in order {
        let (name, _, score) = &candidates[i];
        state.consider(0, name, Strategy::FixedWindow, *score);
    }
    if state.champion.is_none() {
        // every objective was <= 0; take the first in family order
        let i = (0..candidates.len()).min_by_key(|&i| candidates[i].1).unwrap();
        state.champion = Some(candidates[i].0.clone());
        state.score = candidates[i].2;
        state.history.push(Promotion {
            period: 0,
            candidate: candidates[i].0.clone(),
            score: candidates[i].2,
            strategy: Strategy::FixedWindow,
        });
    }
    Ok(state)
}

/// The scalar used for champion decisions: OTV AUC.
pub fn objective(report: &MetricReport) -> f64 {
    report.auc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: String,
    pub family: Family,
    pub window: WindowSpec,
    pub run_id: Option<RunId>,
    pub itv: Option<MetricReport>,
    pub otv: Option<MetricReport>,
    pub objective: Option<f64>,
    pub best_trial: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProdRow {
    pub model: String,
    pub run_id: RunId,
    pub prod: MetricReport,
}

/// Champion minus baseline on the same production slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uplift {
    pub auc: f64,
    pub ks: f64,
    pub f1: f64,
    pub three_decile_capture: f64,
}

impl Uplift {
    pub fn between(champion: &MetricReport, baseline: &MetricReport) -> Self {
        Self {
            auc: champion.auc - baseline.auc,
            ks: champion.ks - baseline.ks,
            f1: champion.f1 - baseline.f1,
            three_decile_capture: champion.three_decile_capture - baseline.three_decile_capture,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period: u32,
    pub otv: MonthWindow,
    pub prod: MonthWindow,
    /// Incumbent's fresh OTV metrics (absent in period 0).
    pub incumbent_otv: Option<MetricReport>,
    pub candidates: Vec<CandidateOutcome>,
    pub champion: String,
    pub champion_run: RunId,
    pub champion_score: f64,
    pub promoted: bool,
    pub champion_prod: MetricReport,
    pub baseline: String,
    pub baseline_prod: MetricReport,
    /// Frozen fixed-window model of every family, for comparison.
    pub family_baselines: Vec<ProdRow>,
    pub uplift: Uplift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub periods: Vec<PeriodReport>,
    pub promotions: Vec<Promotion>,
    pub baseline: String,
    pub baseline_run: RunId,
    pub baseline_hash: ContentHash,
}

impl ReplayReport {
    pub fn content_hash(&self) -> ContentHash {
        ContentHash::of_json(self)
    }

    pub fn lineage(&self) -> Vec<(u32, RunId)> {
        self.periods
            .iter()
            .map(|p| (p.period, p.champion_run.clone()))
            .collect()
    }

    pub fn final_uplift(&self) -> Option<Uplift> {
        self.periods.last().map(|p| p.uplift)
    }
}

/// A trained candidate kept in memory across periods.
#[derive(Debug, Clone)]
struct Trained {
    name: String,
    family: Family,
    window: WindowSpec,
    artifact: ModelArtifact,
    plan: PreprocessPlan,
    trials: Vec<TrialLog>,
    best_trial: usize,
    itv: MetricReport,
    otv: MetricReport,
    itv_scores: Vec<f64>,
    run_id: RunId,
}

impl Trained {
    fn train_bad_rate(&self) -> f64 {
        self.artifact.provenance().train_bad_rate
    }
}

struct Context<'a> {
    table: &'a Table,
    split: &'a SplitSpec,
    schedule: &'a ReplaySchedule,
    seed: u64,
}

impl Context<'_> {
    fn dataset(&self, rows: &[usize], plan: &PreprocessPlan) -> Result<TimeIndexedDataset, DatasetError> {
        apply_preprocess(&self.table.select(rows), plan)
    }

    fn threshold(&self, scores: &[f64], train_bad_rate: f64) -> Result<f64, MetricError> {
        match self.schedule.threshold {
            Some(t) => Ok(t),
            None => threshold_for_rate(scores, train_bad_rate),
        }
    }

    fn report(
        &self,
        data: &TimeIndexedDataset,
        scores: &[f64],
        train_bad_rate: f64,
        reference: Option<&[f64]>,
    ) -> Result<MetricReport, MetricError> {
        let mut sample = ScoredSample::new(scores, &data.labels)?;
        if let Some(g) = &data.groups {
            sample = sample.with_groups(g)?;
        }
        evaluate(&sample, self.threshold(scores, train_bad_rate)?, reference)
    }

    /// Scores `rows` with a trained candidate through its own plan.
    fn score(&self, c: &Trained, rows: &[usize]) -> Result<(TimeIndexedDataset, Vec<f64>), ReplayErrorKind> {
        let data = self.dataset(rows, &c.plan)?;
        let scores = c
            .artifact
            .predict_proba(&data)
            .map_err(|e| ReplayErrorKind::InvalidSchedule(e.to_string()))?;
        Ok((data, scores))
    }

    fn evaluate_on(&self, c: &Trained, rows: &[usize], with_psi: bool) -> Result<MetricReport, ReplayErrorKind> {
        let (data, scores) = self.score(c, rows)?;
        let reference = with_psi.then_some(c.itv_scores.as_slice());
        Ok(self.report(&data, &scores, c.train_bad_rate(), reference)?)
    }

    /// Slice, preprocess, tune and evaluate one candidate.
    fn build(&self, family: Family, window: WindowSpec, otv_rows: &[usize]) -> Result<Trained, String> {
        let name = candidate_name(family, window.strategy, window.iteration);
        let period = window.iteration;
        let rows = train_slice(self.table, &window).map_err(|e| e.to_string())?;
        let (train_rows, itv_rows) = partition_dev(
            self.table,
            &rows,
            self.split.train_fraction,
            seed::sub_seed(self.seed, "split", period, &name),
        );
        let plan = fit_preprocess(&self.table.select(&train_rows)).map_err(|e| e.to_string())?;
        let train = self.dataset(&train_rows, &plan).map_err(|e| e.to_string())?;
        let itv = self.dataset(&itv_rows, &plan).map_err(|e| e.to_string())?;
        let result = tune(
            &self.schedule.base_config(family),
            &train,
            &itv,
            &self.schedule.space(family),
            self.schedule.budget(family),
            seed::sub_seed(self.seed, "tuner", period, &name),
        )
        .map_err(|e| e.to_string())?;
        if let FittedModel::Lr(m) = &result.artifact.body().model {
            if !m.converged {
                return Err(format!(
                    "logistic regression did not converge (gradient norm {:.3e})",
                    m.grad_norm
                ));
            }
        }

        let mut fp = Hasher::new();
        let ids: Vec<u64> = train_rows.iter().map(|&r| self.table.row_ids[r]).collect();
        fp.update_json(&ids).update_json(&plan);
        let data_fingerprint = fp.finish();
        let provenance = Provenance {
            window: Some(window),
            train_rows: train.n_rows(),
            train_bad_rate: train.bad_rate(),
            data_fingerprint: data_fingerprint.clone(),
            plan: Some(plan.clone()),
        };
        let artifact = result.artifact.with_provenance(provenance);
        let run_id = RunId::derive(&result.best, &window, &data_fingerprint, artifact.content_hash());

        let itv_scores = artifact.predict_proba(&itv).map_err(|e| e.to_string())?;
        let itv_report = self
            .report(&itv, &itv_scores, train.bad_rate(), None)
            .map_err(|e| e.to_string())?;
        let mut trained = Trained {
            name,
            family,
            window,
            artifact,
            plan,
            trials: result.trials,
            best_trial: result.best_index,
            itv: itv_report.clone(),
            otv: itv_report,
            itv_scores,
            run_id,
        };
        trained.otv = self.evaluate_on(&trained, otv_rows, true).map_err(|e| e.to_string())?;
        Ok(trained)
    }

    fn record(
        &self,
        registry: &Registry,
        c: &Trained,
        period: u32,
        parent: Option<&RunId>,
        prod: Option<&MetricReport>,
        clock: u32,
    ) -> Result<(), RegistryError> {
        let mut metrics = BTreeMap::new();
        metrics.insert("itv".to_string(), c.itv.clone());
        metrics.insert("otv".to_string(), c.otv.clone());
        if let Some(p) = prod {
            metrics.insert("prod".to_string(), p.clone());
        }
        let record = RunRecord {
            run_id: c.run_id.clone(),
            period,
            candidate: c.name.clone(),
            family: c.family,
            window: c.window,
            config: c.artifact.config().clone(),
            data_fingerprint: c.artifact.provenance().data_fingerprint.clone(),
            artifact_hash: c.artifact.content_hash().clone(),
            artifact_path: RunRecord::ARTIFACT_FILE.into(),
            trial_log_path: RunRecord::TRIAL_LOG_FILE.into(),
            metrics,
            parent_champion: parent.cloned(),
            timestamp: format!("month-{clock}"),
        };
        registry.record_run(&record, &c.artifact, &c.trials)?;
        Ok(())
    }
}

fn outcome(family: Family, window: WindowSpec, result: &Result<Trained, String>) -> CandidateOutcome {
    match result {
        Ok(c) => CandidateOutcome {
            candidate: c.name.clone(),
            family,
            window,
            run_id: Some(c.run_id.clone()),
            itv: Some(c.itv.clone()),
            otv: Some(c.otv.clone()),
            objective: Some(objective(&c.otv)),
            best_trial: Some(c.best_trial),
            error: None,
        },
        Err(e) => CandidateOutcome {
            candidate: candidate_name(family, window.strategy, window.iteration),
            family,
            window,
            run_id: None,
            itv: None,
            otv: None,
            objective: None,
            best_trial: None,
            error: Some(e.clone()),
        },
    }
}

fn check_windows(table: &Table, split: &SplitSpec, schedule: &ReplaySchedule) -> Result<(), ReplayErrorKind> {
    split.validate()?;
    schedule.validate()?;
    if split.prod.len() < schedule.periods as usize {
        return Err(ReplayErrorKind::InvalidSchedule(format!(
            "{} periods scheduled but only {} PROD windows",
            schedule.periods,
            split.prod.len()
        )));
    }
    if split.dev.end >= split.otv.start {
        return Err(ReplayErrorKind::InvalidSchedule(format!(
            "dev {} must end before OTV {} starts",
            split.dev, split.otv
        )));
    }
    let horizon = table
        .horizon()
        .ok_or_else(|| DatasetError::EmptyWindow("dataset".into()))?;
    split.check_horizon(horizon)?;
    Ok(())
}

/// Runs the full replay. With a registry, every trained candidate, the
/// champion lineage and each period report are persisted as they complete.
pub fn replay(
    table: &Table,
    split: &SplitSpec,
    schedule: &ReplaySchedule,
    seed: u64,
    registry: Option<&Registry>,
) -> Result<ReplayReport, ReplayError> {
    let mut last_completed: Option<u32> = None;
    let fail = |period: u32, last: Option<u32>| {
        move |kind: ReplayErrorKind| ReplayError {
            period,
            last_completed: last,
            kind,
        }
    };
    check_windows(table, split, schedule).map_err(fail(0, None))?;
    let ctx = Context {
        table,
        split,
        schedule,
        seed,
    };
    let mut families = schedule.families.clone();
    families.sort();
    families.dedup();
    let width = schedule.release_width;

    let mut state = ChampionState::new();
    let mut pool: BTreeMap<String, Trained> = BTreeMap::new();
    let mut frozen: Vec<String> = Vec::new();
    let mut baseline = String::new();
    let mut periods = Vec::new();

    for i in 0..schedule.periods {
        let err = fail(i, last_completed);
        let otv_w = split.otv.shifted(i * width);
        let prod_w = split.prod[i as usize];
        if otv_w.end + split.gap > prod_w.start {
            return Err(err(DatasetError::GapViolation {
                otv_end: otv_w.end,
                gap: split.gap,
                prod_start: prod_w.start,
            }
            .into()));
        }
        let otv_rows = table.rows_in(otv_w);
        if otv_rows.is_empty() {
            return Err(err(
                DatasetError::EmptyWindow(format!("otv {otv_w} at period {i}")).into()
            ));
        }
        let prod_rows = table.rows_in(prod_w);
        if prod_rows.is_empty() {
            return Err(err(
                DatasetError::EmptyWindow(format!("prod {prod_w} at period {i}")).into()
            ));
        }

        let parent_run = state.champion.as_ref().map(|c| pool[c].run_id.clone());
        let mut incumbent_otv = None;
        let jobs: Vec<(Family, WindowSpec)> = if i == 0 {
            families
                .iter()
                .map(|&f| (f, WindowSpec::at(Strategy::FixedWindow, split.dev, width, 0)))
                .collect()
        } else {
            let incumbent = &pool[state.champion.as_ref().expect("champion after period 0")];
            match ctx.evaluate_on(incumbent, &otv_rows, false) {
                Ok(r) => {
                    state.reevaluate(objective(&r));
                    incumbent_otv = Some(r);
                }
                Err(e) => {
                    tracing::warn!(period = i, error = %e, "incumbent could not be re-scored; S* reset to 0");
                    state.reevaluate(0.0);
                }
            }
            families
                .iter()
                .flat_map(|&f| {
                    schedule
                        .strategies
                        .iter()
                        .map(move |&s| (f, WindowSpec::at(s, split.dev, width, i)))
                })
                .collect()
        };
        for (_, w) in &jobs {
            if w.train.end >= otv_w.start {
                return Err(err(ReplayErrorKind::InvalidSchedule(format!(
                    "train window {} reaches OTV {otv_w}",
                    w.train
                ))));
            }
        }

        let results: Vec<Result<Trained, String>> = jobs.par_iter().map(|&(f, w)| ctx.build(f, w, &otv_rows)).collect();
        let outcomes: Vec<CandidateOutcome> = jobs.iter().zip(&results).map(|(&(f, w), r)| outcome(f, w, r)).collect();
        for o in &outcomes {
            if let Some(e) = &o.error {
                tracing::warn!(period = i, candidate = %o.candidate, error = %e, "candidate failed");
            }
        }

        let mut promoted = false;
        let trained: Vec<Trained> = results.into_iter().filter_map(Result::ok).collect();
        if i == 0 {
            if trained.is_empty() {
                let why = outcomes
                    .iter()
                    .filter_map(|o| o.error.clone())
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(err(ReplayErrorKind::NoViableCandidate(why)));
            }
            let scored: Vec<(String, Family, f64)> = trained
                .iter()
                .map(|c| (c.name.clone(), c.family, objective(&c.otv)))
                .collect();
            state = select_initial_champion(&scored).map_err(&err)?;
            baseline = state.champion.clone().unwrap();
            frozen = trained.iter().map(|c| c.name.clone()).collect();
            promoted = true;
        } else {
            for c in &trained {
                promoted |= state.consider(i, &c.name, c.window.strategy, objective(&c.otv));
            }
        }
        let trained_names: Vec<String> = trained.iter().map(|c| c.name.clone()).collect();
        for c in trained {
            pool.insert(c.name.clone(), c);
        }

        let champion = state.champion.clone().unwrap();
        let champion_prod = ctx.evaluate_on(&pool[&champion], &prod_rows, true).map_err(&err)?;
        let baseline_prod = ctx.evaluate_on(&pool[&baseline], &prod_rows, true).map_err(&err)?;
        let family_baselines = frozen
            .iter()
            .map(|name| {
                Ok(ProdRow {
                    model: name.clone(),
                    run_id: pool[name].run_id.clone(),
                    prod: ctx.evaluate_on(&pool[name], &prod_rows, true)?,
                })
            })
            .collect::<Result<Vec<_>, ReplayErrorKind>>()
            .map_err(&err)?;

        let report = PeriodReport {
            period: i,
            otv: otv_w,
            prod: prod_w,
            incumbent_otv,
            candidates: outcomes,
            champion: champion.clone(),
            champion_run: pool[&champion].run_id.clone(),
            champion_score: state.score,
            promoted,
            uplift: Uplift::between(&champion_prod, &baseline_prod),
            champion_prod,
            baseline: baseline.clone(),
            baseline_prod,
            family_baselines,
        };

        if let Some(reg) = registry {
            for name in &trained_names {
                let prod = (name == &champion).then_some(&report.champion_prod);
                ctx.record(reg, &pool[name], i, parent_run.as_ref(), prod, prod_w.start)
                    .map_err(|e| err(e.into()))?;
            }
            reg.append_lineage(i, &report.champion_run).map_err(|e| err(e.into()))?;
            reg.write_period(i, &report).map_err(|e| err(e.into()))?;
        }
        // keep memory bounded: only the champion and frozen baselines are needed later
        pool.retain(|name, _| name == &champion || frozen.contains(name));

        tracing::info!(
            period = i,
            champion = %champion,
            score = report.champion_score,
            prod_auc = report.champion_prod.auc,
            baseline_auc = report.baseline_prod.auc,
            "period complete"
        );
        periods.push(report);
        last_completed = Some(i);
    }

    Ok(ReplayReport {
        promotions: state.history,
        baseline_run: pool[&baseline].run_id.clone(),
        baseline_hash: pool[&baseline].artifact.content_hash().clone(),
        baseline,
        periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_state() {
        let s = ChampionState::new();
        assert_eq!(s.champion, None);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn first_challenger_beats_zero() {
        let mut s = ChampionState::new();
        assert!(s.consider(1, "GBT^RW_M2", Strategy::RollingWindow, 0.70));
        assert_eq!(s.champion.as_deref(), Some("GBT^RW_M2"));
    }

    #[test]
    fn tie_keeps_incumbent() {
        let mut s = ChampionState::new();
        s.consider(0, "LR^FW_M1", Strategy::FixedWindow, 0.70);
        assert!(!s.consider(1, "RF^FO_M2", Strategy::FixedOrigin, 0.70));
        assert_eq!(s.champion.as_deref(), Some("LR^FW_M1"));
        assert_eq!(s.history.len(), 1);
    }

    #[test]
    fn reevaluation_can_lower_the_bar() {
        let mut s = ChampionState::new();
        s.consider(0, "LR^FW_M1", Strategy::FixedWindow, 0.80);
        s.reevaluate(0.60);
        assert!(s.consider(1, "RF^RW_M2", Strategy::RollingWindow, 0.65));
    }

    #[test]
    fn initial_selection_examples() {
        let c = |n: &str, f, v| (n.to_string(), f, v);
        let s = select_initial_champion(&[
            c("GBT^FW_M1", Family::GBT, 0.687),
            c("LR^FW_M1", Family::LR, 0.682),
            c("RF^FW_M1", Family::RF, 0.678),
            c("MLP^FW_M1", Family::MLP, 0.655),
        ])
        .unwrap();
        assert_eq!(s.champion.as_deref(), Some("GBT^FW_M1"));
        let s = select_initial_champion(&[c("GBT^FW_M1", Family::GBT, 0.7), c("LR^FW_M1", Family::LR, 0.7)]).unwrap();
        assert_eq!(s.champion.as_deref(), Some("LR^FW_M1"));
        assert!(select_initial_champion(&[]).is_err());
    }

    #[test]
    fn names() {
        assert_eq!(candidate_name(Family::GBT, Strategy::RollingWindow, 2), "GBT^RW_M3");
    }
}
