//! Single-line, machine-parseable fatal errors.

use std::fmt;

use vintage_core::orchestrator::ReplayErrorKind;
use vintage_core::{ConfigError, DatasetError, RegistryError, ReplayError, SynthError};

#[derive(Debug)]
pub struct Failure {
    pub class: &'static str,
    pub period: Option<u32>,
    pub last_completed: Option<Option<u32>>,
    pub message: String,
}

impl Failure {
    pub fn new(class: &'static str, message: impl Into<String>) -> Self {
        Self {
            class,
            period: None,
            last_completed: None,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.last_completed.is_some() {
            return 3;
        }
        match self.class {
            "invalid-config" | "config-unreadable" | "invalid-spec" | "invalid-threads" => 2,
            _ => 1,
        }
    }
}

impl std::error::Error for Failure {}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: class={}", self.class)?;
        if let Some(p) = self.period {
            write!(f, " period={p}")?;
        }
        match self.last_completed {
            Some(Some(p)) => write!(f, " last_completed={p}")?,
            Some(None) => write!(f, " last_completed=none")?,
            None => {}
        }
        let msg = self.message.replace(['\n', '\r'], " ");
        write!(f, " message={msg:?}")
    }
}

pub fn dataset_class(e: &DatasetError) -> &'static str {
    match e {
        DatasetError::MissingFile(_) => "data-not-found",
        DatasetError::HeaderMismatch { .. } => "header-mismatch",
        DatasetError::RaggedRow { .. } => "ragged-row",
        DatasetError::UnparseableDate { .. } | DatasetError::UnparseableValue { .. } => "unparseable-value",
        DatasetError::InvalidSchema(_) => "invalid-schema",
        DatasetError::EmptyTrain => "empty-train",
        DatasetError::UnknownColumn(_) => "unknown-column",
        DatasetError::EmptyWindow(_) => "empty-window",
        DatasetError::GapViolation { .. } => "gap-violation",
        DatasetError::InvalidSplit(_) | DatasetError::OutsideHorizon { .. } => "invalid-split",
        DatasetError::Io(_) => "io",
    }
}

pub fn registry_class(e: &RegistryError) -> &'static str {
    match e {
        RegistryError::Io { .. } => "store-io",
        RegistryError::MissingId(_) => "missing-id",
        RegistryError::HashMismatch { .. } => "hash-mismatch",
        RegistryError::Collision(_) => "collision",
        RegistryError::Corrupt(_) => "corrupt-store",
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let class = match &e {
            ConfigError::Io { .. } => "config-unreadable",
            ConfigError::Parse(_) | ConfigError::Invalid(_) => "invalid-config",
            ConfigError::Dataset(d) => dataset_class(d),
            ConfigError::Synth(SynthError::InvalidSpec(_)) => "invalid-spec",
            ConfigError::Synth(SynthError::Dataset(d)) => dataset_class(d),
        };
        Failure::new(class, e.to_string())
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        ConfigError::Synth(e).into()
    }
}

impl From<RegistryError> for Failure {
    fn from(e: RegistryError) -> Self {
        Failure::new(registry_class(&e), e.to_string())
    }
}

impl From<ReplayError> for Failure {
    fn from(e: ReplayError) -> Self {
        let class = match &e.kind {
            ReplayErrorKind::Dataset(d) => dataset_class(d),
            ReplayErrorKind::Registry(r) => registry_class(r),
            ReplayErrorKind::Metric(_) => "metric",
            ReplayErrorKind::InvalidSchedule(_) => "invalid-schedule",
            ReplayErrorKind::NoViableCandidate(_) => "no-viable-candidate",
        };
        Failure {
            class,
            period: Some(e.period),
            last_completed: Some(e.last_completed),
            message: e.kind.to_string(),
        }
    }
}

/// Errors that are not already classified are output failures.
pub fn classify(e: anyhow::Error) -> Failure {
    match e.downcast::<Failure>() {
        Ok(f) => f,
        Err(e) => Failure::new("io", format!("{e:#}")),
    }
}
