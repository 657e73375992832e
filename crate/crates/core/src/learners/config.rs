use std::fmt;

use serde::{Deserialize, Serialize};

use super::LearnerError;

/// Classifier family. The declaration order is the tie-break order for
/// champion selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    LR,
    RF,
    GBT,
    MLP,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::LR, Family::RF, Family::GBT, Family::MLP];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Some(Family::LR),
            "RF" => Some(Family::RF),
            "GBT" | "XGB" => Some(Family::GBT),
            "MLP" | "NN" => Some(Family::MLP),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Two-stage penalised logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrConfig {
    /// L1 strength of the selection stage.
    pub l1: f64,
    /// L2 strength of the refit stage.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop when the (proximal) gradient norm falls below this.
    pub tol: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        Self {
            l1: 1e-3,
            l2: 1e-3,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features drawn per split; `None` means `ceil(sqrt(N))`.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 8,
            max_features: None,
            min_leaf: 5,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf scores.
    pub lambda: f64,
    /// Per-leaf penalty; also the minimum split gain.
    pub gamma: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            max_depth: 3,
            min_child_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    /// Dropout rate per hidden layer.
    pub dropout: Vec<f64>,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![150, 150, 150],
            dropout: vec![0.10, 0.0, 0.10],
            step_size: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 10,
            batch_size: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum LearnerConfig {
    #[serde(rename = "LR")]
    Lr(LrConfig),
    #[serde(rename = "RF")]
    Rf(RfConfig),
    #[serde(rename = "GBT")]
    Gbt(GbtConfig),
    #[serde(rename = "MLP")]
    Mlp(MlpConfig),
}

impl LearnerConfig {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::LR => LearnerConfig::Lr(LrConfig::default()),
            Family::RF => LearnerConfig::Rf(RfConfig::default()),
            Family::GBT => LearnerConfig::Gbt(GbtConfig::default()),
            Family::MLP => LearnerConfig::Mlp(MlpConfig::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            LearnerConfig::Lr(_) => Family::LR,
            LearnerConfig::Rf(_) => Family::RF,
            LearnerConfig::Gbt(_) => Family::GBT,
            LearnerConfig::Mlp(_) => Family::MLP,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::InvalidConfig(m.to_string()));
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        match self {
            LearnerConfig::Lr(c) => {
                if !nonneg(c.l1) || !nonneg(c.l2) {
                    return bad("LR strengths must be >= 0");
                }
                if !(c.tol > 0.0) {
                    return bad("LR tolerance must be > 0");
                }
            }
            LearnerConfig::Rf(c) => {
                if c.n_trees == 0 {
                    return bad("RF needs at least one tree");
                }
                if c.min_leaf == 0 {
                    return bad("RF min_leaf must be >= 1");
                }
                if c.max_features == Some(0) {
                    return bad("RF max_features must be >= 1");
                }
            }
            LearnerConfig::Gbt(c) => {
                if c.rounds == 0 {
                    return bad("GBT needs at least one round");
                }
                if !(0.0..=1.0).contains(&c.learning_rate) {
                    return bad("GBT learning rate must lie in [0, 1]");
                }
                if !nonneg(c.lambda) || !nonneg(c.gamma) || !nonneg(c.min_child_weight) {
                    return bad("GBT penalties must be >= 0");
                }
            }
            LearnerConfig::Mlp(c) => {
                if c.hidden.is_empty() || c.hidden.contains(&0) {
                    return bad("MLP hidden widths must be positive");
                }
                if c.dropout.len() != c.hidden.len() {
                    return bad("MLP needs one dropout rate per hidden layer");
                }
                if c.dropout.iter().any(|d| !(0.0..1.0).contains(d)) {
                    return bad("MLP dropout must lie in [0, 1)");
                }
                if c.batch_size == 0 || !(c.step_size > 0.0) {
                    return bad("MLP batch size and step size must be positive");
                }
            }
        }
        Ok(())
    }

    /// Sets a named hyperparameter; integers are rounded.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), LearnerError> {
        let int = |v: f64| v.round().max(0.0) as usize;
        match (self, name) {
            (LearnerConfig::Lr(c), "l1") => c.l1 = value,
            (LearnerConfig::Lr(c), "l2") => c.l2 = value,
            (LearnerConfig::Lr(c), "max_iter") => c.max_iter = int(value),
            (LearnerConfig::Rf(c), "n_trees") => c.n_trees = int(value),
            (LearnerConfig::Rf(c), "max_depth") => c.max_depth = int(value),
            (LearnerConfig::Rf(c), "max_features") => c.max_features = Some(int(value)),
            (LearnerConfig::Rf(c), "min_leaf") => c.min_leaf = int(value),
            (LearnerConfig::Gbt(c), "rounds") => c.rounds = int(value),
            (LearnerConfig::Gbt(c), "learning_rate") => c.learning_rate = value,
            (LearnerConfig::Gbt(c), "lambda") => c.lambda = value,
            (LearnerConfig::Gbt(c), "gamma") => c.gamma = value,
            (LearnerConfig::Gbt(c), "max_depth") => c.max_depth = int(value),
            (LearnerConfig::Gbt(c), "min_child_weight") => c.min_child_weight = value,
            (LearnerConfig::Mlp(c), "step_size") => c.step_size = value,
            (LearnerConfig::Mlp(c), "epochs") => c.epochs = int(value),
            (LearnerConfig::Mlp(c), "batch_size") => c.batch_size = int(value),
            (LearnerConfig::Mlp(c), "dropout") => {
                // the outer hidden layers carry dropout, inner ones do not
                let last = c.dropout.len().saturating_sub(1);
                for (k, d) in c.dropout.iter_mut().enumerate() {
                    *d = if k == 0 || k == last { value } else { 0.0 };
                }
            }
            (cfg, _) => {
                return Err(LearnerError::InvalidConfig(format!(
                    "{} has no hyperparameter {name}",
                    cfg.family()
                )))
            }
        }
        Ok(())
    }

    /// Sets the model's own random seed (RF bootstrap, MLP init and
    /// dropout). LR and GBT are deterministic and ignore it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            LearnerConfig::Rf(c) => c.seed = seed,
            LearnerConfig::Mlp(c) => c.seed = seed,
            _ => {}
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for f in Family::ALL {
            LearnerConfig::default_for(f).validate().unwrap();
        }
    }

    #[test]
    fn invariants_enforced() {
        let mut c = LearnerConfig::Gbt(GbtConfig::default());
        c.set_param("learning_rate", 1.5).unwrap();
        assert!(c.validate().is_err());
        let mut c = LearnerConfig::Lr(LrConfig::default());
        c.set_param("l1", -1.0).unwrap();
        assert!(c.validate().is_err());
        let mut c = LearnerConfig::Mlp(MlpConfig::default());
        c.set_param("dropout", 1.0).unwrap();
        assert!(c.validate().is_err());
        assert!(LearnerConfig::Lr(LrConfig::default()).set_param("rounds", 3.0).is_err());
    }

    #[test]
    fn dropout_param_targets_outer_layers() {
        let mut c = LearnerConfig::Mlp(MlpConfig::default());
        c.set_param("dropout", 0.2).unwrap();
        match c {
            LearnerConfig::Mlp(m) => assert_eq!(m.dropout, vec![0.2, 0.0, 0.2]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn config_serde_is_tagged() {
        let c = LearnerConfig::Gbt(GbtConfig::default());
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["family"], "GBT");
        assert_eq!(serde_json::from_value::<LearnerConfig>(v).unwrap(), c);
    }
}
