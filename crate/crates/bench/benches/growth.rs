use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use odrf_bench::ridge_data;
use odrf_core::forest::fit_forest;
use odrf_core::rng::stream;
use odrf_core::tree::grow;
use odrf_core::{ForestConfig, GrowConfig, QRule};

fn grow_tree(c: &mut Criterion) {
    let mut group = c.benchmark_group("grow_odt");
    group.sample_size(10);
    for n in [500usize, 2_000] {
        let data = ridge_data(n, 5, 4);
        let train = data.all_indices();
        let config = GrowConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| grow(&data, &train, &config, false, &mut stream(5, 0)))
        });
    }
    group.finish();
}

fn forest(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_forest");
    group.sample_size(10);
    let data = ridge_data(1_000, 5, 6);
    let train = data.all_indices();
    for rule in [QRule::Practical, QRule::Theory] {
        let mut config = ForestConfig {
            trees: 20,
            ..ForestConfig::default()
        };
        config.grow.split.q_rule = rule;
        group.bench_with_input(BenchmarkId::from_parameter(rule), &rule, |b, _| {
            b.iter(|| fit_forest(&data, &train, &config))
        });
    }
    group.finish();
}

criterion_group!(benches, grow_tree, forest);
criterion_main!(benches);
