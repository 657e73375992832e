//! Fixtures shared by the criterion benchmarks in `benches/`.

use vintage_core::dataset::{apply_preprocess, fit_preprocess, Vintaged};
use vintage_core::synthgen::{generate, DriftSpec};
use vintage_core::{MonthWindow, Table, TimeIndexedDataset};

/// Preprocessed training rows from the first `months` of a drift scenario
/// with `rows_per_month` loans a month.
pub fn training_set(rows_per_month: usize, months: u32) -> TimeIndexedDataset {
    let spec = DriftSpec {
        rows_per_month,
        months: months.max(2),
        ..DriftSpec::default()
    };
    let synth = generate(&spec).expect("default spec is valid");
    let table = Table::from_raw(&synth.raw, &synth.schema).expect("generated table matches its schema");
    let rows = table.rows_in(MonthWindow::new(0, months - 1));
    let sub = table.select(&rows);
    let plan = fit_preprocess(&sub).expect("plan fits");
    apply_preprocess(&sub, &plan).expect("plan applies")
}

/// Deterministic scores and labels with a moderate signal.
pub fn scored(n: usize) -> (Vec<f64>, Vec<u8>) {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let y = (next() < 0.2) as u8;
            (0.6 * next() + 0.4 * f64::from(y) * next(), y)
        })
        .unzip()
}
