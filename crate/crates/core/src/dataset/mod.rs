//! Ingestion, train-only preprocessing, time splits and retraining windows.

mod dataset;
mod preprocess;
mod raw;
mod schema;
mod split;
mod table;
mod window;

use thiserror::Error;

pub use dataset::TimeIndexedDataset;
pub use preprocess::{apply_preprocess, fit_preprocess, ColumnPlan, PreprocessPlan, OTHERS};
pub use raw::{date_to_days, drop_leakage, load_table, parse_date, LeakageDrop, RawTable};
pub use schema::{ColumnRole, ColumnSchema, ColumnSpec};
pub use split::{partition_dev, split, MonthWindow, SplitSpec, Splits, Vintaged};
pub use table::{CategoricalColumn, FeatureColumn, Table};
pub use window::{train_slice, Strategy, WindowSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("data file not found: {0}")]
    MissingFile(String),
    #[error("header mismatch: missing columns [{}], unexpected columns [{}]", missing.join(", "), unexpected.join(", "))]
    HeaderMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("ragged row at data row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("unparseable date {value:?} in column {column} at row {row}")]
    UnparseableDate { column: String, row: usize, value: String },
    #[error("unparseable value {value:?} in column {column} at row {row}")]
    UnparseableValue { column: String, row: usize, value: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("training slice is empty")]
    EmptyTrain,
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("window {0} contains no rows")]
    EmptyWindow(String),
    #[error("gap violation: OTV ends month {otv_end}, gap {gap}, but PROD starts month {prod_start}")]
    GapViolation { otv_end: u32, gap: u32, prod_start: u32 },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("window {window} is outside the dataset horizon [{horizon_start}, {horizon_end}]")]
    OutsideHorizon {
        window: String,
        horizon_start: u32,
        horizon_end: u32,
    },
    #[error("i/o error: {0}")]
    Io(String),
}
