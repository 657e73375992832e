use serde::{Deserialize, Serialize};

use super::{open_unit, Booster, Family, Forest, ImportanceReport, LearnerConfig, LearnerError, LrModel, Mlp};
use crate::dataset::{PreprocessPlan, TimeIndexedDataset, WindowSpec};
use crate::hash::ContentHash;

pub const ARTIFACT_FORMAT: &str = "vintage-model";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedModel {
    Lr(LrModel),
    Rf(Forest),
    Gbt(Booster),
    Mlp(Mlp),
}

/// Where the training data came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub window: Option<WindowSpec>,
    pub train_rows: usize,
    pub train_bad_rate: f64,
    pub data_fingerprint: ContentHash,
    /// Preprocessing fitted on the same training slice, if any.
    pub plan: Option<PreprocessPlan>,
}

impl Provenance {
    pub fn from_train(train: &TimeIndexedDataset) -> Self {
        Self {
            window: None,
            train_rows: train.n_rows(),
            train_bad_rate: train.bad_rate(),
            data_fingerprint: train.content_hash(),
            plan: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactBody {
    pub family: Family,
    pub config: LearnerConfig,
    pub feature_names: Vec<String>,
    pub model: FittedModel,
    pub provenance: Provenance,
}

/// A trained classifier together with the hash of its serialized body.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    body: ArtifactBody,
    content_hash: ContentHash,
}

#[derive(Serialize, Deserialize)]
struct Envelope<B> {
    format: String,
    version: u32,
    content_hash: ContentHash,
    body: B,
}

impl ModelArtifact {
    pub fn new(body: ArtifactBody) -> Self {
        let content_hash = ContentHash::of_json(&body);
        Self { body, content_hash }
    }

    pub fn body(&self) -> &ArtifactBody {
        &self.body
    }

    pub fn family(&self) -> Family {
        self.body.family
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.body.config
    }

    pub fn feature_names(&self) -> &[String] {
        &self.body.feature_names
    }

    pub fn provenance(&self) -> &Provenance {
        &self.body.provenance
    }

    pub fn content_hash(&self) -> &ContentHash {
        &self.content_hash
    }

    /// Replaces the provenance block; the hash is recomputed.
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.body.provenance = provenance;
        Self::new(self.body)
    }

    /// Selected-feature mask; only logistic regression has one.
    pub fn selected_features(&self) -> Option<&[bool]> {
        match &self.body.model {
            FittedModel::Lr(m) => Some(&m.selected),
            _ => None,
        }
    }

    fn n_inputs(&self) -> usize {
        self.body.feature_names.len()
    }

    /// Probability of the positive class for one already-preprocessed row.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let p = match &self.body.model {
            FittedModel::Lr(m) => m.predict_row(row),
            FittedModel::Rf(m) => m.predict_row(row),
            FittedModel::Gbt(m) => m.predict_row(row),
            FittedModel::Mlp(m) => m.predict_row(row),
        };
        open_unit(p)
    }

    pub fn predict_proba(&self, rows: &TimeIndexedDataset) -> Result<Vec<f64>, LearnerError> {
        if rows.n_features() != self.n_inputs() {
            return Err(LearnerError::FeatureCountMismatch {
                expected: self.n_inputs(),
                found: rows.n_features(),
            });
        }
        Ok(match &self.body.model {
            FittedModel::Mlp(m) => m.predict(rows).into_iter().map(open_unit).collect(),
            _ => (0..rows.n_rows()).map(|i| self.score_row(rows.row(i))).collect(),
        })
    }

    /// Native importances: |w| for logistic regression, mean Gini gain for
    /// the forest, total gain for boosting.
    pub fn feature_importance(&self) -> Result<ImportanceReport, LearnerError> {
        let scores: Vec<f64> = match &self.body.model {
            FittedModel::Lr(m) => m.weights.iter().map(|w| w.abs()).collect(),
            FittedModel::Rf(m) => m.importance(),
            FittedModel::Gbt(m) => m.importance(),
            FittedModel::Mlp(_) => return Err(LearnerError::UnsupportedFamily(Family::MLP)),
        };
        Ok(ImportanceReport::from_scores(
            scores
                .into_iter()
                .enumerate()
                .map(|(j, s)| (j, self.body.feature_names[j].clone(), s)),
        ))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let env = Envelope {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            content_hash: self.content_hash.clone(),
            body: &self.body,
        };
        serde_json::to_vec(&env).expect("artifact serializes")
    }

    /// Parses an artifact file and checks the embedded hash against the body.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LearnerError> {
        let env: Envelope<ArtifactBody> =
            serde_json::from_slice(bytes).map_err(|e| LearnerError::Format(e.to_string()))?;
        if env.format != ARTIFACT_FORMAT {
            return Err(LearnerError::Format(format!("unknown format {:?}", env.format)));
        }
        if env.version != ARTIFACT_VERSION {
            return Err(LearnerError::Format(format!("unsupported version {}", env.version)));
        }
        let artifact = Self::new(env.body);
        if artifact.content_hash != env.content_hash {
            return Err(LearnerError::Format(format!(
                "content hash mismatch: recorded {}, computed {}",
                env.content_hash.short(),
                artifact.content_hash.short()
            )));
        }
        Ok(artifact)
    }
}
