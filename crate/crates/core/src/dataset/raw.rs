use std::collections::BTreeSet;
use std::path::Path;

use chrono::NaiveDate;
use tracing::warn;

use super::{ColumnRole, ColumnSchema, DatasetError};

/// Rectangular text table, column-major. `None` marks an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    names: Vec<String>,
    columns: Vec<Vec<Option<String>>>,
    n_rows: usize,
}

impl RawTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<Option<String>>>) -> Result<Self, DatasetError> {
        if names.len() != columns.len() {
            return Err(DatasetError::InvalidSchema(
                "column name count differs from column count".into(),
            ));
        }
        let unique: BTreeSet<_> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(DatasetError::InvalidSchema("duplicate column names".into()));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DatasetError::InvalidSchema(format!(
                    "column {name} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
        }
        Ok(Self { names, columns, n_rows })
    }

    /// Builds a table from row-major string cells; empty strings become missing.
    pub fn from_rows<S: AsRef<str>>(names: &[&str], rows: &[Vec<S>]) -> Result<Self, DatasetError> {
        let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    expected: names.len(),
                    found: row.len(),
                });
            }
            for (col, cell) in columns.iter_mut().zip(row) {
                col.push(cell_value(cell.as_ref()));
            }
        }
        Self::new(names.iter().map(|s| s.to_string()).collect(), columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&[Option<String>]> {
        self.index_of(name).map(|i| self.columns[i].as_slice())
    }

    pub fn cell(&self, row: usize, name: &str) -> Option<&str> {
        self.column(name).and_then(|c| c[row].as_deref())
    }

    fn replace_column(&mut self, idx: usize, values: Vec<Option<String>>) {
        self.columns[idx] = values;
    }

    /// Writes the table as RFC-4180 CSV with a header row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names).map_err(io_err)?;
        let mut record = Vec::with_capacity(self.names.len());
        for r in 0..self.n_rows {
            record.clear();
            record.extend(self.columns.iter().map(|c| c[r].as_deref().unwrap_or("")));
            w.write_record(&record).map_err(io_err)?;
        }
        w.flush().map_err(|e| DatasetError::Io(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> DatasetError {
    DatasetError::Io(e.to_string())
}

fn cell_value(s: &str) -> Option<String> {
    if s.is_empty() {
        None
    } else {
        Some(s.to_string())
    }
}

/// Reads a comma-separated file with a header row and checks the header
/// against `schema`. Leakage columns may be absent; every other declared
/// column must be present and no undeclared column may appear.
pub fn load_table(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<RawTable, DatasetError> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(io_err)?;
    let header: Vec<String> = reader.headers().map_err(io_err)?.iter().map(str::to_string).collect();

    let declared: BTreeSet<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let present: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let missing: Vec<String> = schema
        .columns
        .iter()
        .filter(|c| c.role != ColumnRole::LeakageDrop && !present.contains(c.name.as_str()))
        .map(|c| c.name.clone())
        .collect();
    let unexpected: Vec<String> = header
        .iter()
        .filter(|h| !declared.contains(h.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() || present.len() != header.len() {
        return Err(DatasetError::HeaderMismatch { missing, unexpected });
    }

    let mut columns = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DatasetError::RaggedRow {
                row: i,
                expected: *expected_len as usize,
                found: *len as usize,
            },
            _ => io_err(e),
        })?;
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            col.push(cell_value(cell));
        }
    }
    RawTable::new(header, columns)
}

/// Parses `YYYY-MM-DD`, `YYYY/MM/DD`, `YYYY-MM` and `Mon-YYYY` (first of
/// the month for the month-only forms).
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    for fmt in ["%Y-%m-%d", "%Y/%m/%d"] {
        if let Ok(d) = NaiveDate::parse_from_str(s, fmt) {
            return Some(d);
        }
    }
    let with_day = format!("{s}-01");
    if let Ok(d) = NaiveDate::parse_from_str(&with_day, "%Y-%m-%d") {
        return Some(d);
    }
    NaiveDate::parse_from_str(&format!("01-{s}"), "%d-%b-%Y").ok()
}

/// Replaces `date_col` with the signed day difference `date_col - ref_col`.
/// A missing date (on either side) stays missing.
pub fn date_to_days(table: &RawTable, date_col: &str, ref_col: &str) -> Result<RawTable, DatasetError> {
    let idx = table
        .index_of(date_col)
        .ok_or_else(|| DatasetError::UnknownColumn(date_col.to_string()))?;
    let refs = table
        .column(ref_col)
        .ok_or_else(|| DatasetError::UnknownColumn(ref_col.to_string()))?;
    let parse = |column: &str, row: usize, v: &str| {
        parse_date(v).ok_or_else(|| DatasetError::UnparseableDate {
            column: column.to_string(),
            row,
            value: v.to_string(),
        })
    };
    let mut out = Vec::with_capacity(table.n_rows());
    for (row, (d, r)) in table.columns[idx].iter().zip(refs).enumerate() {
        let v = match (d, r) {
            (Some(d), Some(r)) => {
                let d = parse(date_col, row, d)?;
                let r = parse(ref_col, row, r)?;
                Some((d - r).num_days().to_string())
            }
            (Some(d), None) => {
                parse(date_col, row, d)?;
                None
            }
            (None, _) => None,
        };
        out.push(v);
    }
    let mut t = table.clone();
    t.replace_column(idx, out);
    Ok(t)
}

/// Result of [`drop_leakage`]: the surviving table plus the declared leakage
/// columns that were not in the file.
#[derive(Debug, Clone)]
pub struct LeakageDrop {
    pub table: RawTable,
    pub absent: Vec<String>,
}

pub fn drop_leakage(table: &RawTable, schema: &ColumnSchema) -> LeakageDrop {
    let leak: BTreeSet<&str> = schema.names_with(ColumnRole::LeakageDrop).collect();
    let absent: Vec<String> = leak
        .iter()
        .filter(|n| table.index_of(n).is_none())
        .map(|n| n.to_string())
        .collect();
    for name in &absent {
        warn!(column = %name, "leakage column not present; nothing dropped");
    }
    let (names, columns) = table
        .names
        .iter()
        .zip(&table.columns)
        .filter(|(n, _)| !leak.contains(n.as_str()))
        .map(|(n, c)| (n.clone(), c.clone()))
        .unzip();
    LeakageDrop {
        table: RawTable {
            names,
            columns,
            n_rows: table.n_rows,
        },
        absent,
    }
}
