use super::raw::{date_to_days, drop_leakage, parse_date};
use super::{ColumnRole, ColumnSchema, DatasetError, RawTable};

pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    pub name: String,
    /// Index into `levels`, or [`MISSING_CODE`].
    pub codes: Vec<u32>,
    pub levels: Vec<String>,
}

impl CategoricalColumn {
    pub fn value(&self, row: usize) -> Option<&str> {
        match self.codes[row] {
            MISSING_CODE => None,
            c => Some(&self.levels[c as usize]),
        }
    }

    pub fn from_values<S: AsRef<str>>(name: &str, values: &[Option<S>]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let mut lookup = std::collections::HashMap::new();
        let codes = values
            .iter()
            .map(|v| match v {
                None => MISSING_CODE,
                Some(s) => *lookup.entry(s.as_ref().to_string()).or_insert_with(|| {
                    levels.push(s.as_ref().to_string());
                    (levels.len() - 1) as u32
                }),
            })
            .collect();
        Self {
            name: name.to_string(),
            codes,
            levels,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureColumn {
    /// `NaN` marks a missing value.
    Numeric {
        name: String,
        values: Vec<f64>,
    },
    Categorical(CategoricalColumn),
}

impl FeatureColumn {
    pub fn name(&self) -> &str {
        match self {
            FeatureColumn::Numeric { name, .. } => name,
            FeatureColumn::Categorical(c) => &c.name,
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            FeatureColumn::Numeric { name, values } => FeatureColumn::Numeric {
                name: name.clone(),
                values: rows.iter().map(|&r| values[r]).collect(),
            },
            FeatureColumn::Categorical(c) => FeatureColumn::Categorical(CategoricalColumn {
                name: c.name.clone(),
                codes: rows.iter().map(|&r| c.codes[r]).collect(),
                levels: c.levels.clone(),
            }),
        }
    }
}

/// A raw table resolved against its schema: leakage columns dropped, dates
/// converted, cells typed. Still unstandardised and with missing values; this
/// is what preprocessing plans are fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub features: Vec<FeatureColumn>,
    pub labels: Vec<u8>,
    /// Month index from the dataset origin.
    pub vintage: Vec<u32>,
    /// Position of the row in the source table.
    pub row_ids: Vec<u64>,
    pub groups: Option<CategoricalColumn>,
}

impl Table {
    pub fn from_raw(raw: &RawTable, schema: &ColumnSchema) -> Result<Self, DatasetError> {
        schema.validate()?;
        let mut table = drop_leakage(raw, schema).table;
        let date_cols: Vec<&str> = schema.names_with(ColumnRole::FeatureDate).collect();
        if let Some(reference) = &schema.reference_date {
            for d in &date_cols {
                table = date_to_days(&table, d, reference)?;
            }
        }
        let column = |name: &str| {
            table
                .column(name)
                .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
        };

        let labels = column(schema.label())?
            .iter()
            .enumerate()
            .map(|(row, v)| parse_label(schema.label(), row, v.as_deref()))
            .collect::<Result<Vec<_>, _>>()?;

        let origin = schema
            .vintage_origin
            .as_deref()
            .map(|o| parse_date(o).ok_or_else(|| DatasetError::InvalidSchema(format!("bad vintage_origin {o:?}"))))
            .transpose()?;
        let vintage = column(schema.vintage())?
            .iter()
            .enumerate()
            .map(|(row, v)| parse_vintage(schema.vintage(), row, v.as_deref(), origin))
            .collect::<Result<Vec<_>, _>>()?;

        let mut features = Vec::new();
        for spec in &schema.columns {
            match spec.role {
                ColumnRole::FeatureNumeric | ColumnRole::FeatureDate => {
                    let values = column(&spec.name)?
                        .iter()
                        .enumerate()
                        .map(|(row, v)| parse_numeric(&spec.name, row, v.as_deref()))
                        .collect::<Result<Vec<_>, _>>()?;
                    features.push(FeatureColumn::Numeric {
                        name: spec.name.clone(),
                        values,
                    });
                }
                ColumnRole::FeatureCategorical => {
                    features.push(FeatureColumn::Categorical(CategoricalColumn::from_values(
                        &spec.name,
                        column(&spec.name)?,
                    )));
                }
                _ => {}
            }
        }
        let groups = schema
            .group_column
            .as_deref()
            .map(|g| column(g).map(|c| CategoricalColumn::from_values(g, c)))
            .transpose()?;

        Ok(Self {
            features,
            labels,
            vintage,
            row_ids: (0..raw.n_rows() as u64).collect(),
            groups,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureColumn> {
        self.features.iter().find(|f| f.name() == name)
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.iter().map(|f| f.select(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            vintage: rows.iter().map(|&r| self.vintage[r]).collect(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            groups: self.groups.as_ref().map(|g| CategoricalColumn {
                name: g.name.clone(),
                codes: rows.iter().map(|&r| g.codes[r]).collect(),
                levels: g.levels.clone(),
            }),
        }
    }

    pub fn horizon(&self) -> Option<(u32, u32)> {
        let min = *self.vintage.iter().min()?;
        let max = *self.vintage.iter().max()?;
        Some((min, max))
    }
}

fn parse_label(column: &str, row: usize, v: Option<&str>) -> Result<u8, DatasetError> {
    match v.map(str::trim) {
        Some("1") | Some("1.0") | Some("true") | Some("True") => Ok(1),
        Some("0") | Some("0.0") | Some("false") | Some("False") => Ok(0),
        other => Err(DatasetError::UnparseableValue {
            column: column.to_string(),
            row,
            value: other.unwrap_or("").to_string(),
        }),
    }
}

fn parse_numeric(column: &str, row: usize, v: Option<&str>) -> Result<f64, DatasetError> {
    let Some(s) = v else { return Ok(f64::NAN) };
    let s = s.trim();
    if s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("na") {
        return Ok(f64::NAN);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(DatasetError::UnparseableValue {
            column: column.to_string(),
            row,
            value: s.to_string(),
        }),
    }
}

fn parse_vintage(
    column: &str,
    row: usize,
    v: Option<&str>,
    origin: Option<chrono::NaiveDate>,
) -> Result<u32, DatasetError> {
    use chrono::Datelike;
    let bad = || DatasetError::UnparseableValue {
        column: column.to_string(),
        row,
        value: v.unwrap_or("").to_string(),
    };
    let s = v.ok_or_else(bad)?.trim();
    if let Ok(m) = s.parse::<u32>() {
        return Ok(m);
    }
    let origin = origin.ok_or_else(bad)?;
    let date = parse_quarter(s).or_else(|| parse_date(s)).ok_or_else(bad)?;
    let months = (date.year() - origin.year()) * 12 + date.month() as i32 - origin.month() as i32;
    u32::try_from(months).map_err(|_| bad())
}

/// `YYYY-Qn` or `YYYYQn`, mapped to the first month of the quarter.
fn parse_quarter(s: &str) -> Option<chrono::NaiveDate> {
    let (y, q) = s.split_once('Q')?;
    let year: i32 = y.trim_end_matches('-').parse().ok()?;
    let q: u32 = q.parse().ok()?;
    if !(1..=4).contains(&q) {
        return None;
    }
    chrono::NaiveDate::from_ymd_opt(year, 3 * (q - 1) + 1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnSpec;

    #[test]
    fn resolves_roles() {
        let c = |n: &str, role| ColumnSpec { name: n.into(), role };
        let mut schema = ColumnSchema::new(vec![
            c("issue_d", ColumnRole::VintageDate),
            c("last_pymnt_d", ColumnRole::FeatureDate),
            c("grade", ColumnRole::FeatureCategorical),
            c("amt", ColumnRole::FeatureNumeric),
            c("int_rate", ColumnRole::LeakageDrop),
            c("bad", ColumnRole::Label),
        ]);
        schema.reference_date = Some("issue_d".into());
        schema.vintage_origin = Some("2015-07".into());
        let raw = RawTable::from_rows(
            &["issue_d", "last_pymnt_d", "grade", "amt", "int_rate", "bad"],
            &[
                vec!["2015-07-01", "2015-08-01", "A", "10", "5.5", "0"],
                vec!["2016-01-01", "", "B", "", "7.0", "1"],
                vec!["2016-04-01", "2016-04-11", "A", "3.5", "7.0", "0"],
            ],
        )
        .unwrap();
        let t = Table::from_raw(&raw, &schema).unwrap();
        assert_eq!(t.vintage, vec![0, 6, 9]);
        assert_eq!(t.labels, vec![0, 1, 0]);
        assert_eq!(t.features.len(), 3);
        match &t.features[0] {
            FeatureColumn::Numeric { name, values } => {
                assert_eq!(name, "last_pymnt_d");
                assert_eq!(values[0], 31.0);
                assert!(values[1].is_nan());
                assert_eq!(values[2], 10.0);
            }
            _ => panic!(),
        }
        let sub = t.select(&[2, 0]);
        assert_eq!(sub.row_ids, vec![2, 0]);
        assert_eq!(sub.vintage, vec![9, 0]);
    }

    #[test]
    fn quarters_map_to_first_month() {
        let origin = parse_date("2001-01").unwrap();
        assert_eq!(parse_vintage("q", 0, Some("2002-Q1"), Some(origin)).unwrap(), 12);
        assert_eq!(parse_vintage("q", 0, Some("2001Q3"), Some(origin)).unwrap(), 6);
        assert_eq!(parse_vintage("q", 0, Some("17"), None).unwrap(), 17);
    }
}
