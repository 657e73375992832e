use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DatasetError, MonthWindow, Vintaged};

/// How a training window moves as new months of labelled data arrive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The development window, never moved.
    FixedWindow,
    /// Start pinned to the origin, end advances.
    FixedOrigin,
    /// Start and end advance together; length is constant.
    RollingWindow,
}

impl Strategy {
    pub fn code(self) -> &'static str {
        match self {
            Strategy::FixedWindow => "FW",
            Strategy::FixedOrigin => "FO",
            Strategy::RollingWindow => "RW",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "FW" => Some(Strategy::FixedWindow),
            "FO" => Some(Strategy::FixedOrigin),
            "RW" => Some(Strategy::RollingWindow),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub strategy: Strategy,
    pub train: MonthWindow,
    pub iteration: u32,
}

impl WindowSpec {
    /// Training window at production iteration `i` for release width `w`:
    /// fixed-window `dev`, fixed-origin `[dev.start, dev.end + i*w]`,
    /// rolling `[dev.start + i*w, dev.end + i*w]`.
    pub fn at(strategy: Strategy, dev: MonthWindow, width: u32, iteration: u32) -> Self {
        let advance = iteration * width;
        let train = match strategy {
            Strategy::FixedWindow => dev,
            Strategy::FixedOrigin => MonthWindow::new(dev.start, dev.end + advance),
            Strategy::RollingWindow => dev.shifted(advance),
        };
        Self {
            strategy,
            train,
            iteration,
        }
    }
}

/// Rows whose vintage lies in the window's training range.
pub fn train_slice<D: Vintaged>(data: &D, window: &WindowSpec) -> Result<Vec<usize>, DatasetError> {
    let rows = data.rows_in(window.train);
    if rows.is_empty() {
        return Err(DatasetError::EmptyWindow(format!(
            "{} train {} at iteration {}",
            window.strategy, window.train, window.iteration
        )));
    }
    Ok(rows)
}
