use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vintage_bench::{scored, training_set};
use vintage_core::learners::{train_gbt, train_lr, train_rf, GbtConfig, LrConfig, RfConfig};
use vintage_core::metrics::{auc, ks, psi, ScoredSample};

fn metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("metrics");
    for n in [10_000usize, 100_000] {
        let (s, y) = scored(n);
        let sample = ScoredSample::new(&s, &y).unwrap();
        group.bench_with_input(BenchmarkId::new("auc", n), &sample, |b, x| b.iter(|| auc(black_box(x))));
        group.bench_with_input(BenchmarkId::new("ks", n), &sample, |b, x| b.iter(|| ks(black_box(x))));
        let (half, rest) = s.split_at(n / 2);
        group.bench_function(BenchmarkId::new("psi", n), |b| {
            b.iter(|| psi(black_box(half), black_box(rest), 10))
        });
    }
    group.finish();
}

fn learners(c: &mut Criterion) {
    let data = training_set(2_000, 6);
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("lr", |b| b.iter(|| train_lr(black_box(&data), &LrConfig::default())));
    let rf = RfConfig {
        n_trees: 10,
        max_depth: 6,
        ..RfConfig::default()
    };
    group.bench_function("rf_10_trees", |b| b.iter(|| train_rf(black_box(&data), &rf)));
    let gbt = GbtConfig {
        rounds: 30,
        max_depth: 3,
        ..GbtConfig::default()
    };
    group.bench_function("gbt_30_rounds", |b| b.iter(|| train_gbt(black_box(&data), &gbt)));
    group.finish();

    let model = train_gbt(&data, &gbt).unwrap();
    c.bench_function("score/gbt", |b| b.iter(|| model.predict_proba(black_box(&data))));
}

criterion_group!(benches, metrics, learners);
criterion_main!(benches);
