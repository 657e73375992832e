//! Replays the default synthetic drift scenario and prints the per-period
//! champion against the frozen baseline.
//!
//! `cargo run --release -p vintage-core --example drift_replay`

use std::collections::BTreeMap;
use std::time::Instant;

use vintage_core::dataset::{MonthWindow, SplitSpec, Table};
use vintage_core::synthgen::{generate, DriftSpec};
use vintage_core::tuner::{Param, SearchSpace};
use vintage_core::{replay, Family, ReplaySchedule};

fn main() {
    let start = Instant::now();
    let spec = DriftSpec::default();
    let synth = generate(&spec).expect("default spec is valid");
    let table = Table::from_raw(&synth.raw, &synth.schema).expect("generated table parses");
    eprintln!("generated {} rows in {:?}", table.n_rows(), start.elapsed());

    let split = SplitSpec {
        dev: MonthWindow::new(0, 5),
        train_fraction: 0.75,
        otv: MonthWindow::new(6, 6),
        prod: (0..12).map(|i| MonthWindow::new(9 + i, 9 + i)).collect(),
        gap: 2,
    };
    let mut spaces = BTreeMap::new();
    spaces.insert(
        Family::RF,
        SearchSpace::new()
            .with("n_trees", Param::Int { lo: 10, hi: 20 })
            .with("max_depth", Param::Int { lo: 5, hi: 7 })
            .with("min_leaf", Param::Int { lo: 20, hi: 100 }),
    );
    spaces.insert(
        Family::GBT,
        SearchSpace::new()
            .with("rounds", Param::Int { lo: 20, hi: 50 })
            .with("learning_rate", Param::LogUniform { lo: 0.05, hi: 0.3 })
            .with("max_depth", Param::Int { lo: 2, hi: 3 }),
    );
    let schedule = ReplaySchedule {
        families: vec![Family::LR, Family::RF, Family::GBT],
        budgets: [(Family::LR, 2), (Family::RF, 1), (Family::GBT, 2)]
            .into_iter()
            .collect(),
        spaces,
        ..ReplaySchedule::default()
    };
    let report = replay(&table, &split, &schedule, 7, None).expect("replay completes");
    println!("period\tchampion\tchampion_auc\tbaseline_auc\tdelta_auc");
    for p in &report.periods {
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{:+.4}",
            p.period, p.champion, p.champion_prod.auc, p.baseline_prod.auc, p.uplift.auc
        );
    }
    eprintln!("total {:?}", start.elapsed());
}
