//! The four classifier families behind one scoring contract.
//!
//! Every family trains from a [`TimeIndexedDataset`] and a [`LearnerConfig`]
//! into a [`ModelArtifact`], which scores rows with probabilities strictly
//! inside (0, 1) and (except the MLP) reports native feature importances.

mod artifact;
mod config;
mod forest;
mod gbt;
mod importance;
mod lr;
mod mlp;
mod tree;

use thiserror::Error;

pub use artifact::{ArtifactBody, FittedModel, ModelArtifact, Provenance, ARTIFACT_FORMAT, ARTIFACT_VERSION};
pub use config::{Family, GbtConfig, LearnerConfig, LrConfig, MlpConfig, RfConfig};
pub use forest::{gini, split_gain, Forest};
pub use gbt::Booster;
pub use importance::{ImportanceEntry, ImportanceReport};
pub use lr::{logistic_objective, LrModel};
pub use mlp::{param_count, DropoutMasks, Mlp, MlpGradient};
pub use tree::{Node, Tree};

use crate::dataset::TimeIndexedDataset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("training labels contain a single class")]
    SingleClassLabels,
    #[error("training set is empty")]
    EmptyTrain,
    #[error("loss became non-finite at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("expected {expected} features, got {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("operation requires family {expected}, got {found}")]
    WrongFamily { expected: Family, found: Family },
    #[error("family {0} has no native feature importance")]
    UnsupportedFamily(Family),
    #[error("invalid learner config: {0}")]
    InvalidConfig(String),
    #[error("node has no samples")]
    EmptyNode,
    #[error("child counts do not add up to the parent counts")]
    InconsistentCounts,
    #[error("artifact format error: {0}")]
    Format(String),
}

/// Lower bound on reported probabilities; outputs are clamped to
/// `[PROB_EPS, 1 - PROB_EPS]` so every family stays strictly inside (0, 1).
pub const PROB_EPS: f64 = 1e-12;

pub(crate) fn open_unit(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `1 / (1 + exp(-z))`, evaluated without overflow.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic loss of a raw score, `-[y ln p + (1-y) ln(1-p)]` with `p = sigmoid(z)`.
pub(crate) fn log_loss(y: u8, z: f64) -> f64 {
    softplus(z) - y as f64 * z
}

fn check_labels(train: &TimeIndexedDataset) -> Result<(), LearnerError> {
    if train.n_rows() == 0 {
        return Err(LearnerError::EmptyTrain);
    }
    let pos = train.labels.iter().filter(|&&y| y != 0).count();
    if pos == 0 || pos == train.n_rows() {
        return Err(LearnerError::SingleClassLabels);
    }
    Ok(())
}

/// Trains the family named by `cfg`.
pub fn train(train: &TimeIndexedDataset, cfg: &LearnerConfig) -> Result<ModelArtifact, LearnerError> {
    cfg.validate()?;
    check_labels(train)?;
    let model = match cfg {
        LearnerConfig::Lr(c) => FittedModel::Lr(lr::fit(train, c)),
        LearnerConfig::Rf(c) => FittedModel::Rf(forest::fit(train, c)),
        LearnerConfig::Gbt(c) => FittedModel::Gbt(gbt::fit(train, c)),
        LearnerConfig::Mlp(c) => FittedModel::Mlp(mlp::fit(train, c)?),
    };
    Ok(ModelArtifact::new(ArtifactBody {
        family: cfg.family(),
        config: cfg.clone(),
        feature_names: train.feature_names.clone(),
        model,
        provenance: Provenance::from_train(train),
    }))
}

pub fn train_lr(train: &TimeIndexedDataset, cfg: &LrConfig) -> Result<ModelArtifact, LearnerError> {
    self::train(train, &LearnerConfig::Lr(cfg.clone()))
}

pub fn train_rf(train: &TimeIndexedDataset, cfg: &RfConfig) -> Result<ModelArtifact, LearnerError> {
    self::train(train, &LearnerConfig::Rf(cfg.clone()))
}

pub fn train_gbt(train: &TimeIndexedDataset, cfg: &GbtConfig) -> Result<ModelArtifact, LearnerError> {
    self::train(train, &LearnerConfig::Gbt(cfg.clone()))
}

pub fn train_mlp(train: &TimeIndexedDataset, cfg: &MlpConfig) -> Result<ModelArtifact, LearnerError> {
    self::train(train, &LearnerConfig::Mlp(cfg.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_standard_and_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(2.0) - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-16);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert_eq!(softplus(800.0), 800.0);
    }

    #[test]
    fn single_class_rejected_for_every_family() {
        let d = TimeIndexedDataset::from_rows(&[vec![1.0], vec![2.0]], &[1, 1]);
        for cfg in [
            LearnerConfig::Lr(LrConfig::default()),
            LearnerConfig::Rf(RfConfig::default()),
            LearnerConfig::Gbt(GbtConfig::default()),
            LearnerConfig::Mlp(MlpConfig::default()),
        ] {
            assert_eq!(train(&d, &cfg).unwrap_err(), LearnerError::SingleClassLabels);
        }
    }
}
