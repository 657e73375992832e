//! Append-only file store for artifacts, run records and champion lineage.
//!
//! Layout under the store root:
//!
//! ```text
//! index.txt                 run ids in append order, one per line
//! lineage.tsv               "period<TAB>run id" per completed period
//! runs/<id>/record.json     the RunRecord
//! runs/<id>/trial_log.json  tuner trials (not part of any hash)
//! runs/<id>/artifact.json   the model artifact
//! periods/<NNN>.json        per-period report
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::WindowSpec;
use crate::hash::{ContentHash, Hasher};
use crate::learners::{Family, LearnerConfig, ModelArtifact};
use crate::metrics::MetricReport;
use crate::tuner::TrialLog;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("store io error at {path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown run id {0}")]
    MissingId(String),
    #[error("artifact of run {id} has hash {computed}, record says {recorded}")]
    HashMismatch {
        id: String,
        recorded: String,
        computed: String,
    },
    #[error("run id {0} already recorded with different content")]
    Collision(String),
    #[error("corrupt store: {0}")]
    Corrupt(String),
}

fn io_err(path: &Path, e: impl fmt::Display) -> RegistryError {
    RegistryError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Short content-addressed run identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunId(String);

impl RunId {
    /// Hash of (config, window, data fingerprint, artifact hash).
    pub fn derive(
        config: &LearnerConfig,
        window: &WindowSpec,
        data_fingerprint: &ContentHash,
        artifact_hash: &ContentHash,
    ) -> Self {
        let mut h = Hasher::new();
        h.update_json(config)
            .update_json(window)
            .update(data_fingerprint.as_str())
            .update(artifact_hash.as_str());
        Self(h.finish().short().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn parse(s: &str) -> Option<Self> {
        let ok = s.len() == 16 && s.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase());
        ok.then(|| Self(s.to_string()))
    }
}

impl fmt::Display for RunId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: RunId,
    pub period: u32,
    /// Display name such as `GBT^RW_M3`.
    pub candidate: String,
    pub family: Family,
    pub window: WindowSpec,
    pub config: LearnerConfig,
    pub data_fingerprint: ContentHash,
    pub artifact_hash: ContentHash,
    pub artifact_path: String,
    pub trial_log_path: String,
    /// Keyed by split name (`itv`, `otv`, `prod`).
    pub metrics: BTreeMap<String, MetricReport>,
    /// Champion going into this period.
    pub parent_champion: Option<RunId>,
    /// Replay clock: the month the period's production slice starts.
    pub timestamp: String,
}

impl RunRecord {
    pub const ARTIFACT_FILE: &'static str = "artifact.json";
    pub const TRIAL_LOG_FILE: &'static str = "trial_log.json";
    pub const RECORD_FILE: &'static str = "record.json";
}

#[derive(Debug, Clone)]
pub struct Registry {
    root: PathBuf,
}

fn write_new(path: &Path, bytes: &[u8]) -> Result<(), RegistryError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn append_line(path: &Path, line: &str) -> Result<(), RegistryError> {
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    writeln!(f, "{line}").map_err(|e| io_err(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>, RegistryError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s.lines().filter(|l| !l.is_empty()).map(str::to_string).collect()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(io_err(path, e)),
    }
}

impl Registry {
    /// Opens a store, creating the directory skeleton if needed.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let root = root.as_ref().to_path_buf();
        for dir in [root.join("runs"), root.join("periods")] {
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        }
        Ok(Self { root })
    }

    /// Opens an existing store without creating anything.
    pub fn open_existing(root: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let root = root.as_ref().to_path_buf();
        if !root.join("runs").is_dir() {
            return Err(RegistryError::Corrupt(format!("{} is not a store", root.display())));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn run_dir(&self, id: &RunId) -> PathBuf {
        self.root.join("runs").join(id.as_str())
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.txt")
    }

    fn lineage_path(&self) -> PathBuf {
        self.root.join("lineage.tsv")
    }

    /// Writes the artifact, trial log and record of one run. Recording the
    /// same record again is a no-op; a different record under an existing id
    /// is rejected.
    pub fn record_run(
        &self,
        record: &RunRecord,
        artifact: &ModelArtifact,
        trials: &[TrialLog],
    ) -> Result<RunId, RegistryError> {
        if &record.artifact_hash != artifact.content_hash() {
            return Err(RegistryError::HashMismatch {
                id: record.run_id.to_string(),
                recorded: record.artifact_hash.to_string(),
                computed: artifact.content_hash().to_string(),
            });
        }
        let dir = self.run_dir(&record.run_id);
        let record_path = dir.join(RunRecord::RECORD_FILE);
        let bytes = serde_json::to_vec_pretty(record).expect("record serializes");
        if record_path.exists() {
            let existing = fs::read(&record_path).map_err(|e| io_err(&record_path, e))?;
            return if existing == bytes {
                Ok(record.run_id.clone())
            } else {
                Err(RegistryError::Collision(record.run_id.to_string()))
            };
        }
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        write_new(&dir.join(&record.artifact_path), &artifact.to_bytes())?;
        let log = serde_json::to_vec_pretty(trials).expect("trial log serializes");
        write_new(&dir.join(&record.trial_log_path), &log)?;
        write_new(&record_path, &bytes)?;
        append_line(&self.index_path(), record.run_id.as_str())?;
        Ok(record.run_id.clone())
    }

    pub fn run_ids(&self) -> Result<Vec<RunId>, RegistryError> {
        read_lines(&self.index_path())?
            .into_iter()
            .map(|l| RunId::parse(&l).ok_or_else(|| RegistryError::Corrupt(format!("bad index line {l:?}"))))
            .collect()
    }

    pub fn load_record(&self, id: &RunId) -> Result<RunRecord, RegistryError> {
        let path = self.run_dir(id).join(RunRecord::RECORD_FILE);
        let bytes = fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => RegistryError::MissingId(id.to_string()),
            _ => io_err(&path, e),
        })?;
        serde_json::from_slice(&bytes).map_err(|e| RegistryError::Corrupt(format!("{}: {e}", path.display())))
    }

    pub fn load_trials(&self, id: &RunId) -> Result<Vec<TrialLog>, RegistryError> {
        let record = self.load_record(id)?;
        let path = self.run_dir(id).join(&record.trial_log_path);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| RegistryError::Corrupt(format!("{}: {e}", path.display())))
    }

    /// Loads and verifies a run's artifact against its record.
    pub fn load_artifact(&self, id: &RunId) -> Result<ModelArtifact, RegistryError> {
        let record = self.load_record(id)?;
        let path = self.run_dir(id).join(&record.artifact_path);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        let mismatch = |computed: String| RegistryError::HashMismatch {
            id: id.to_string(),
            recorded: record.artifact_hash.to_string(),
            computed,
        };
        let artifact =
            ModelArtifact::from_bytes(&bytes).map_err(|_| mismatch(ContentHash::of_bytes(&bytes).to_string()))?;
        if artifact.content_hash() != &record.artifact_hash {
            return Err(mismatch(artifact.content_hash().to_string()));
        }
        Ok(artifact)
    }

    pub fn append_lineage(&self, period: u32, id: &RunId) -> Result<(), RegistryError> {
        append_line(&self.lineage_path(), &format!("{period}\t{id}"))
    }

    /// Champion per completed period, in period order.
    pub fn champion_lineage(&self) -> Result<Vec<(u32, RunId)>, RegistryError> {
        let mut out: Vec<(u32, RunId)> = Vec::new();
        for line in read_lines(&self.lineage_path())? {
            let corrupt = || RegistryError::Corrupt(format!("bad lineage line {line:?}"));
            let (p, id) = line.split_once('\t').ok_or_else(corrupt)?;
            let period: u32 = p.parse().map_err(|_| corrupt())?;
            let id = RunId::parse(id).ok_or_else(corrupt)?;
            if out.last().is_some_and(|(last, _)| *last >= period) {
                return Err(RegistryError::Corrupt(format!("lineage period {period} out of order")));
            }
            out.push((period, id));
        }
        Ok(out)
    }

    pub fn write_period<T: Serialize>(&self, period: u32, report: &T) -> Result<(), RegistryError> {
        let path = self.root.join("periods").join(format!("{period:03}.json"));
        write_new(
            &path,
            &serde_json::to_vec_pretty(report).expect("period report serializes"),
        )
    }

    pub fn read_period<T: serde::de::DeserializeOwned>(&self, period: u32) -> Result<T, RegistryError> {
        let path = self.root.join("periods").join(format!("{period:03}.json"));
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| RegistryError::Corrupt(format!("{}: {e}", path.display())))
    }

    pub fn is_empty(&self) -> Result<bool, RegistryError> {
        Ok(self.run_ids()?.is_empty() && self.champion_lineage()?.is_empty())
    }

    /// Hash over the index, lineage, every record and artifact, and every
    /// period report. Trial logs carry wall-clock timings and are left out.
    pub fn content_hash(&self) -> Result<ContentHash, RegistryError> {
        let read = |p: PathBuf| fs::read(&p).map_err(|e| io_err(&p, e));
        let mut h = Hasher::new();
        let index = self.index_path();
        h.update(if index.exists() { read(index)? } else { Vec::new() });
        let lineage = self.lineage_path();
        h.update(if lineage.exists() { read(lineage)? } else { Vec::new() });
        let mut ids = self.run_ids()?;
        ids.sort();
        for id in ids {
            let record = self.load_record(&id)?;
            h.update(read(self.run_dir(&id).join(RunRecord::RECORD_FILE))?);
            h.update(read(self.run_dir(&id).join(&record.artifact_path))?);
        }
        let periods = self.root.join("periods");
        let mut names: Vec<PathBuf> = fs::read_dir(&periods)
            .map_err(|e| io_err(&periods, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        names.sort();
        for p in names {
            h.update(p.file_name().unwrap().to_string_lossy().as_bytes());
            h.update(read(p)?);
        }
        Ok(h.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{MonthWindow, Strategy, TimeIndexedDataset};
    use crate::learners::{train, GbtConfig};

    fn fixture() -> (ModelArtifact, RunRecord, TimeIndexedDataset) {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![(i % 10) as f64, (i % 7) as f64]).collect();
        let labels: Vec<u8> = (0..100).map(|i| ((i % 10) > 6) as u8).collect();
        let d = TimeIndexedDataset::from_rows(&rows, &labels);
        let cfg = LearnerConfig::Gbt(GbtConfig {
            rounds: 10,
            ..GbtConfig::default()
        });
        let a = train(&d, &cfg).unwrap();
        let window = WindowSpec::at(Strategy::FixedWindow, MonthWindow::new(0, 5), 1, 0);
        let fp = a.provenance().data_fingerprint.clone();
        let id = RunId::derive(&cfg, &window, &fp, a.content_hash());
        let record = RunRecord {
            run_id: id,
            period: 0,
            candidate: "GBT^FW_M1".into(),
            family: Family::GBT,
            window,
            config: cfg,
            data_fingerprint: fp,
            artifact_hash: a.content_hash().clone(),
            artifact_path: RunRecord::ARTIFACT_FILE.into(),
            trial_log_path: RunRecord::TRIAL_LOG_FILE.into(),
            metrics: BTreeMap::new(),
            parent_champion: None,
            timestamp: "month-9".into(),
        };
        (a, record, d)
    }

    #[test]
    fn record_roundtrip_and_idempotence() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path()).unwrap();
        let (a, rec, d) = fixture();
        let id = reg.record_run(&rec, &a, &[]).unwrap();
        assert_eq!(reg.record_run(&rec, &a, &[]).unwrap(), id);
        assert_eq!(reg.run_ids().unwrap(), vec![id.clone()]);
        assert_eq!(reg.load_record(&id).unwrap(), rec);
        let back = reg.load_artifact(&id).unwrap();
        let (p, q) = (a.predict_proba(&d).unwrap(), back.predict_proba(&d).unwrap());
        assert!(p.iter().zip(&q).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn tampered_record_collides() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path()).unwrap();
        let (a, mut rec, _) = fixture();
        reg.record_run(&rec, &a, &[]).unwrap();
        rec.timestamp = "month-10".into();
        assert!(matches!(
            reg.record_run(&rec, &a, &[]),
            Err(RegistryError::Collision(_))
        ));
    }

    #[test]
    fn truncated_artifact_and_unknown_id() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path()).unwrap();
        let (a, rec, _) = fixture();
        let id = reg.record_run(&rec, &a, &[]).unwrap();
        let path = dir.path().join("runs").join(id.as_str()).join(RunRecord::ARTIFACT_FILE);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(matches!(
            reg.load_artifact(&id),
            Err(RegistryError::HashMismatch { .. })
        ));
        let unknown = RunId::parse("0123456789abcdef").unwrap();
        assert_eq!(
            reg.load_artifact(&unknown).unwrap_err(),
            RegistryError::MissingId(unknown.to_string())
        );
    }

    #[test]
    fn lineage_order_and_retention() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path()).unwrap();
        assert!(reg.champion_lineage().unwrap().is_empty());
        let a = RunId::parse("00000000000000aa").unwrap();
        reg.append_lineage(0, &a).unwrap();
        reg.append_lineage(1, &a).unwrap();
        let l = reg.champion_lineage().unwrap();
        assert_eq!(l, vec![(0, a.clone()), (1, a.clone())]);
        reg.append_lineage(1, &a).unwrap();
        assert!(matches!(reg.champion_lineage(), Err(RegistryError::Corrupt(_))));
    }
}
