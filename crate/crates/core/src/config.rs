//! The experiment document: one TOML file per run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{load_table, ColumnSchema, DatasetError, SplitSpec, Table};
use crate::orchestrator::ReplaySchedule;
use crate::synthgen::{generate, DriftSpec, SynthError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Exactly one of `path` and `synthetic`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataSource {
    pub path: Option<PathBuf>,
    pub synthetic: Option<DriftSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_store")]
    pub store: PathBuf,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub data: DataSource,
    /// Required for file data; synthetic data brings its own.
    pub schema: Option<ColumnSchema>,
    pub split: SplitSpec,
    #[serde(default)]
    pub schedule: ReplaySchedule,
}

fn default_store() -> PathBuf {
    PathBuf::from("store")
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.store);
        resolve(&mut cfg.output);
        if let Some(p) = cfg.data.path.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.data.path, &self.data.synthetic) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(ConfigError::Invalid(
                    "data needs exactly one of `path` and `synthetic`".into(),
                ))
            }
            (Some(_), None) if self.schema.is_none() => {
                return Err(ConfigError::Invalid("file data needs a [schema] section".into()))
            }
            _ => {}
        }
        if let Some(s) = &self.data.synthetic {
            s.validate()?;
        }
        if let Some(s) = &self.schema {
            s.validate()?;
        }
        self.split.validate()?;
        Ok(())
    }

    pub fn schema(&self) -> ColumnSchema {
        match (&self.schema, &self.data.synthetic) {
            (Some(s), _) => s.clone(),
            (None, Some(spec)) => spec.schema(),
            (None, None) => unreachable!("validated config has a schema source"),
        }
    }

    /// The synthetic spec with its seed taken from the config seed.
    pub fn drift_spec(&self) -> Option<DriftSpec> {
        self.data.synthetic.clone().map(|mut s| {
            s.seed = self.seed;
            s
        })
    }

    /// Loads or generates the table named by the data section.
    pub fn load_data(&self) -> Result<Table, ConfigError> {
        let schema = self.schema();
        let raw = match (&self.data.path, &self.data.synthetic) {
            (Some(p), _) => load_table(p, &schema)?,
            (None, Some(_)) => generate(&self.drift_spec().expect("synthetic source"))?.raw,
            (None, None) => unreachable!("validated config has a data source"),
        };
        Ok(Table::from_raw(&raw, &schema)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Family;

    const SYNTH: &str = r#"
seed = 11

[data.synthetic]
rows_per_month = 100
months = 12

[split]
dev = { start = 0, end = 3 }
otv = { start = 4, end = 4 }
prod = [{ start = 7, end = 7 }, { start = 8, end = 8 }]
gap = 2

[schedule]
periods = 2
families = ["LR", "GBT"]
strategies = ["fixed-origin", "rolling-window"]

[schedule.budgets]
LR = 2
GBT = 3
"#;

    #[test]
    fn parses_synthetic_config() {
        let cfg = RunConfig::from_toml(SYNTH).unwrap();
        assert_eq!(cfg.schedule.budget(Family::GBT), 3);
        assert_eq!(cfg.schedule.budget(Family::RF), 25);
        assert_eq!(cfg.data.synthetic.as_ref().unwrap().months, 12);
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn needs_exactly_one_source() {
        let none = SYNTH.replace("[data.synthetic]\nrows_per_month = 100\nmonths = 12\n", "[data]\n");
        assert!(matches!(RunConfig::from_toml(&none), Err(ConfigError::Invalid(_))));
        let file_without_schema = SYNTH.replace(
            "[data.synthetic]\nrows_per_month = 100\nmonths = 12\n",
            "[data]\npath = \"x.csv\"\n",
        );
        assert!(matches!(
            RunConfig::from_toml(&file_without_schema),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn seed_is_mandatory() {
        let text = SYNTH.replace("seed = 11\n", "");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }
}
