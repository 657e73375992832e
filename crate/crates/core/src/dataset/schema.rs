use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnRole {
    FeatureNumeric,
    FeatureCategorical,
    /// Calendar date converted to a day offset from the reference date column.
    FeatureDate,
    Label,
    VintageDate,
    LeakageDrop,
    Identifier,
}

impl ColumnRole {
    pub fn is_feature(self) -> bool {
        matches!(
            self,
            ColumnRole::FeatureNumeric | ColumnRole::FeatureCategorical | ColumnRole::FeatureDate
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: ColumnRole,
}

/// Per-column roles for a raw loan table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub columns: Vec<ColumnSpec>,
    /// Column that `feature-date` columns are measured against.
    #[serde(default)]
    pub reference_date: Option<String>,
    /// Month that vintage dates are counted from. Integer vintages are taken
    /// as month indices directly and ignore this.
    #[serde(default)]
    pub vintage_origin: Option<String>,
    /// Identifier column carrying the protected-group tag for the
    /// equal-opportunity gap.
    #[serde(default)]
    pub group_column: Option<String>,
}

impl ColumnSchema {
    pub fn new(columns: Vec<ColumnSpec>) -> Self {
        Self {
            columns,
            reference_date: None,
            vintage_origin: None,
            group_column: None,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(DatasetError::InvalidSchema(format!("column {} declared twice", c.name)));
            }
        }
        let count = |role| self.columns.iter().filter(|c| c.role == role).count();
        if count(ColumnRole::Label) != 1 {
            return Err(DatasetError::InvalidSchema("exactly one label column required".into()));
        }
        if count(ColumnRole::VintageDate) != 1 {
            return Err(DatasetError::InvalidSchema(
                "exactly one vintage-date column required".into(),
            ));
        }
        if count(ColumnRole::FeatureDate) > 0 {
            match &self.reference_date {
                None => {
                    return Err(DatasetError::InvalidSchema(
                        "feature-date columns need reference_date".into(),
                    ))
                }
                Some(r) if !seen.contains(r.as_str()) => {
                    return Err(DatasetError::InvalidSchema(format!(
                        "reference_date {r} is not a declared column"
                    )))
                }
                _ => {}
            }
        }
        if let Some(g) = &self.group_column {
            if self.role_of(g) != Some(ColumnRole::Identifier) {
                return Err(DatasetError::InvalidSchema(format!(
                    "group_column {g} must be an identifier column"
                )));
            }
        }
        Ok(())
    }

    pub fn role_of(&self, name: &str) -> Option<ColumnRole> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.role)
    }

    pub fn names_with(&self, role: ColumnRole) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(move |c| c.role == role)
            .map(|c| c.name.as_str())
    }

    pub fn label(&self) -> &str {
        self.names_with(ColumnRole::Label).next().expect("validated")
    }

    pub fn vintage(&self) -> &str {
        self.names_with(ColumnRole::VintageDate).next().expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str, role: ColumnRole) -> ColumnSpec {
        ColumnSpec {
            name: name.into(),
            role,
        }
    }

    #[test]
    fn needs_one_label_and_vintage() {
        let s = ColumnSchema::new(vec![spec("x", ColumnRole::FeatureNumeric)]);
        assert!(s.validate().is_err());
        let s = ColumnSchema::new(vec![
            spec("x", ColumnRole::FeatureNumeric),
            spec("y", ColumnRole::Label),
            spec("m", ColumnRole::VintageDate),
        ]);
        s.validate().unwrap();
    }

    #[test]
    fn duplicate_names_rejected() {
        let s = ColumnSchema::new(vec![
            spec("x", ColumnRole::FeatureNumeric),
            spec("x", ColumnRole::LeakageDrop),
            spec("y", ColumnRole::Label),
            spec("m", ColumnRole::VintageDate),
        ]);
        assert!(matches!(s.validate(), Err(DatasetError::InvalidSchema(_))));
    }
}
