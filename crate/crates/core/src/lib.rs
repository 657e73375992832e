//! Continuous-training replay engine for probability-of-default models.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`] ingests delimited loan tables, fits train-only preprocessing
//!   plans and cuts time-indexed splits and retraining windows.
//! - [`learners`] holds the four classifier families (penalised logistic
//!   regression, random forest, gradient-boosted trees, MLP) behind one
//!   scoring contract.
//! - [`metrics`] implements the evaluation and monitoring statistics.
//! - [`tuner`] runs seeded hyperparameter searches on in-time validation data.
//! - [`orchestrator`] replays the champion-challenger loop across production
//!   periods.
//! - [`registry`] persists artifacts, run records and champion lineage.
//! - [`synthgen`] generates drifting synthetic credit data.
//! - [`config`] is the single experiment document the CLI consumes.

pub mod config;
pub mod dataset;
pub mod hash;
pub mod learners;
pub mod metrics;
pub mod orchestrator;
pub mod registry;
pub mod seed;
pub mod synthgen;
pub mod tuner;

pub use config::{ConfigError, DataSource, RunConfig};
pub use dataset::{
    ColumnRole, ColumnSchema, DatasetError, MonthWindow, SplitSpec, Strategy, Table, TimeIndexedDataset, WindowSpec,
};
pub use hash::ContentHash;
pub use learners::{Family, ImportanceReport, LearnerConfig, LearnerError, ModelArtifact};
pub use metrics::{MetricError, MetricReport, ScoredSample};
pub use orchestrator::{replay, ChampionState, PeriodReport, ReplayError, ReplayReport, ReplaySchedule};
pub use registry::{Registry, RegistryError, RunId, RunRecord};
pub use synthgen::{DriftSpec, SynthError};
pub use tuner::{SearchSpace, TrialLog, TuneError};
