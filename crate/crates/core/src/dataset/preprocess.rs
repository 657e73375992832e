use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::table::MISSING_CODE;
use super::{DatasetError, FeatureColumn, Table, TimeIndexedDataset};

/// Sink category for values below the frequency threshold or unseen at fit time.
pub const OTHERS: &str = "Others";

/// Suffix of the 0/1 companion column emitted for columns with missing values.
pub const MISSING_FLAG_SUFFIX: &str = "__missing";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnPlan {
    Numeric {
        name: String,
        mean: f64,
        /// Population standard deviation; 0 for a constant column, which is
        /// then emitted as all zeros.
        std: f64,
        flag: bool,
    },
    Categorical {
        name: String,
        /// Categories holding at least 1% of training rows, sorted.
        vocabulary: Vec<String>,
        flag: bool,
    },
}

impl ColumnPlan {
    pub fn name(&self) -> &str {
        match self {
            ColumnPlan::Numeric { name, .. } | ColumnPlan::Categorical { name, .. } => name,
        }
    }

    pub fn has_flag(&self) -> bool {
        match self {
            ColumnPlan::Numeric { flag, .. } | ColumnPlan::Categorical { flag, .. } => *flag,
        }
    }
}

/// Transformation state fitted on a training slice only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessPlan {
    pub columns: Vec<ColumnPlan>,
    pub train_rows: usize,
}

impl PreprocessPlan {
    /// Output column names in emission order: originals (one-hot blocks in
    /// vocabulary order, `Others` last), then missing flags.
    pub fn output_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for c in &self.columns {
            match c {
                ColumnPlan::Numeric { name, .. } => names.push(name.clone()),
                ColumnPlan::Categorical { name, vocabulary, .. } => {
                    names.extend(vocabulary.iter().map(|v| format!("{name}={v}")));
                    names.push(format!("{name}={OTHERS}"));
                }
            }
        }
        names.extend(
            self.columns
                .iter()
                .filter(|c| c.has_flag())
                .map(|c| format!("{}{MISSING_FLAG_SUFFIX}", c.name())),
        );
        names
    }

    pub fn n_outputs(&self) -> usize {
        self.output_names().len()
    }
}

pub fn fit_preprocess(train: &Table) -> Result<PreprocessPlan, DatasetError> {
    let n = train.n_rows();
    if n == 0 {
        return Err(DatasetError::EmptyTrain);
    }
    let columns = train
        .features
        .iter()
        .map(|f| match f {
            FeatureColumn::Numeric { name, values } => {
                let observed: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
                let (mean, std) = if observed.is_empty() {
                    (0.0, 0.0)
                } else {
                    let m = observed.len() as f64;
                    let mean = observed.iter().sum::<f64>() / m;
                    let var = observed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
                    (mean, var.sqrt())
                };
                ColumnPlan::Numeric {
                    name: name.clone(),
                    mean,
                    std,
                    flag: observed.len() < values.len(),
                }
            }
            FeatureColumn::Categorical(c) => {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                let mut missing = false;
                for &code in &c.codes {
                    if code == MISSING_CODE {
                        missing = true;
                    } else {
                        *counts.entry(c.levels[code as usize].as_str()).or_default() += 1;
                    }
                }
                // strictly less than 1% is rare; exactly 1% is kept
                let vocabulary = counts
                    .into_iter()
                    .filter(|&(_, k)| k * 100 >= n)
                    .map(|(level, _)| level.to_string())
                    .collect();
                ColumnPlan::Categorical {
                    name: c.name.clone(),
                    vocabulary,
                    flag: missing,
                }
            }
        })
        .collect();
    Ok(PreprocessPlan { columns, train_rows: n })
}

pub fn apply_preprocess(table: &Table, plan: &PreprocessPlan) -> Result<TimeIndexedDataset, DatasetError> {
    let n = table.n_rows();
    let names = plan.output_names();
    let width = names.len();
    let mut out = vec![0.0; n * width];
    let mut offset = 0;
    let flag_base = width - plan.columns.iter().filter(|c| c.has_flag()).count();
    let mut flag_slot = flag_base;

    for cp in &plan.columns {
        let col = table
            .feature(cp.name())
            .ok_or_else(|| DatasetError::UnknownColumn(cp.name().to_string()))?;
        match (cp, col) {
            (ColumnPlan::Numeric { mean, std, flag, .. }, FeatureColumn::Numeric { values, .. }) => {
                for (i, &v) in values.iter().enumerate() {
                    let row = &mut out[i * width..(i + 1) * width];
                    if v.is_nan() {
                        if *flag {
                            row[flag_slot] = 1.0;
                        }
                    } else if *std > 0.0 {
                        row[offset] = (v - mean) / std;
                    }
                }
                offset += 1;
            }
            (ColumnPlan::Categorical { vocabulary, flag, .. }, FeatureColumn::Categorical(c)) => {
                let position: HashMap<&str, usize> =
                    vocabulary.iter().enumerate().map(|(k, v)| (v.as_str(), k)).collect();
                let others = vocabulary.len();
                let slot_of_level: Vec<usize> = c
                    .levels
                    .iter()
                    .map(|l| position.get(l.as_str()).copied().unwrap_or(others))
                    .collect();
                for (i, &code) in c.codes.iter().enumerate() {
                    let row = &mut out[i * width..(i + 1) * width];
                    if code == MISSING_CODE {
                        if *flag {
                            row[flag_slot] = 1.0;
                        }
                    } else {
                        row[offset + slot_of_level[code as usize]] = 1.0;
                    }
                }
                offset += others + 1;
            }
            _ => return Err(DatasetError::UnknownColumn(cp.name().to_string())),
        }
        if cp.has_flag() {
            flag_slot += 1;
        }
    }
    debug_assert_eq!(offset, flag_base);

    let mut ds = TimeIndexedDataset::new(names, out, table.labels.clone(), table.vintage.clone())
        .with_row_ids(table.row_ids.clone());
    if let Some(g) = &table.groups {
        ds = ds.with_groups(g.codes.clone());
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CategoricalColumn;

    fn table(features: Vec<FeatureColumn>, n: usize) -> Table {
        Table {
            features,
            labels: (0..n).map(|i| (i % 2) as u8).collect(),
            vintage: vec![0; n],
            row_ids: (0..n as u64).collect(),
            groups: None,
        }
    }

    fn cat(name: &str, values: &[Option<&str>]) -> FeatureColumn {
        FeatureColumn::Categorical(CategoricalColumn::from_values(name, values))
    }

    #[test]
    fn rare_category_goes_to_others() {
        // 1000 rows: A 600, B 395, C 5 (0.5%)
        let mut v = vec![Some("A"); 600];
        v.extend(vec![Some("B"); 395]);
        v.extend(vec![Some("C"); 5]);
        let t = table(vec![cat("grade", &v)], 1000);
        let plan = fit_preprocess(&t).unwrap();
        match &plan.columns[0] {
            ColumnPlan::Categorical { vocabulary, flag, .. } => {
                assert_eq!(vocabulary, &["A", "B"]);
                assert!(!flag);
            }
            _ => panic!(),
        }
        let ds = apply_preprocess(&t, &plan).unwrap();
        assert_eq!(ds.feature_names, ["grade=A", "grade=B", "grade=Others"]);
        assert_eq!(ds.row(999), &[0.0, 0.0, 1.0]);
        assert_eq!(ds.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn exactly_one_percent_is_retained() {
        let mut v = vec![Some("A"); 99];
        v.push(Some("B"));
        let plan = fit_preprocess(&table(vec![cat("c", &v)], 100)).unwrap();
        match &plan.columns[0] {
            ColumnPlan::Categorical { vocabulary, .. } => assert_eq!(vocabulary, &["A", "B"]),
            _ => panic!(),
        }
    }

    #[test]
    fn unseen_category_fires_only_others() {
        let train = table(vec![cat("c", &[Some("A"), Some("B"), Some("A"), Some("B")])], 4);
        let plan = fit_preprocess(&train).unwrap();
        let test = table(vec![cat("c", &[Some("A"), Some("B"), Some("Z")])], 3);
        let ds = apply_preprocess(&test, &plan).unwrap();
        assert_eq!(ds.feature_names, ["c=A", "c=B", "c=Others"]);
        assert_eq!(ds.row(2), &[0.0, 0.0, 1.0]);
        assert_eq!(ds.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_column_emits_zeros() {
        let t = table(
            vec![FeatureColumn::Numeric {
                name: "k".into(),
                values: vec![3.0; 5],
            }],
            5,
        );
        let plan = fit_preprocess(&t).unwrap();
        assert!(matches!(plan.columns[0], ColumnPlan::Numeric { std, .. } if std == 0.0));
        let ds = apply_preprocess(&t, &plan).unwrap();
        assert!(ds.features().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_value_imputes_zero_and_flags() {
        let train = table(
            vec![
                FeatureColumn::Numeric {
                    name: "a".into(),
                    values: vec![1.0, f64::NAN, 3.0, 5.0],
                },
                FeatureColumn::Numeric {
                    name: "b".into(),
                    values: vec![1.0, 2.0, 3.0, 4.0],
                },
            ],
            4,
        );
        let plan = fit_preprocess(&train).unwrap();
        assert_eq!(plan.output_names(), ["a", "b", "a__missing"]);
        let ds = apply_preprocess(&train, &plan).unwrap();
        assert_eq!(ds.value(1, 0), 0.0);
        assert_eq!(ds.value(1, 2), 1.0);
        assert_eq!(ds.value(0, 2), 0.0);
        // b is missing only later: imputed, but no flag column exists
        let later = table(
            vec![
                FeatureColumn::Numeric {
                    name: "a".into(),
                    values: vec![2.0],
                },
                FeatureColumn::Numeric {
                    name: "b".into(),
                    values: vec![f64::NAN],
                },
            ],
            1,
        );
        let ds = apply_preprocess(&later, &plan).unwrap();
        assert_eq!(ds.row(0), &[(2.0 - 3.0) / (8.0f64 / 3.0).sqrt(), 0.0, 0.0]);
    }

    #[test]
    fn no_missing_means_no_flags() {
        let t = table(
            vec![FeatureColumn::Numeric {
                name: "a".into(),
                values: vec![1.0, 2.0],
            }],
            2,
        );
        assert_eq!(fit_preprocess(&t).unwrap().output_names(), ["a"]);
    }

    #[test]
    fn train_slice_standardises_to_unit_moments() {
        let values: Vec<f64> = (0..257).map(|i| ((i * 37) % 101) as f64 * 0.3 - 4.0).collect();
        let t = table(
            vec![FeatureColumn::Numeric {
                name: "a".into(),
                values,
            }],
            257,
        );
        let ds = apply_preprocess(&t, &fit_preprocess(&t).unwrap()).unwrap();
        let col = ds.column(0);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_column_error() {
        let t = table(
            vec![FeatureColumn::Numeric {
                name: "a".into(),
                values: vec![1.0],
            }],
            1,
        );
        let plan = fit_preprocess(&t).unwrap();
        let other = table(
            vec![FeatureColumn::Numeric {
                name: "b".into(),
                values: vec![1.0],
            }],
            1,
        );
        assert_eq!(
            apply_preprocess(&other, &plan),
            Err(DatasetError::UnknownColumn("a".into()))
        );
    }

    #[test]
    fn empty_train_rejected() {
        assert_eq!(fit_preprocess(&table(vec![], 0)), Err(DatasetError::EmptyTrain));
    }
}
