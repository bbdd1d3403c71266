use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use odrf_bench::{ridge_data, ridge_labels};
use odrf_core::rng::stream;
use odrf_core::split::{best_threshold, propose_and_select, Criterion as Impurity, NodeData};
use odrf_core::SplitConfig;
use std::hint::black_box;

fn threshold_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("best_threshold");
    for n in [100usize, 1_000, 10_000] {
        let data = ridge_data(n, 1, 1);
        let z = data.features().to_vec();
        let y = data.targets().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| best_threshold(black_box(&z), black_box(&y), Impurity::Variance))
        });
    }
    group.finish();
}

fn node_split(c: &mut Criterion) {
    let mut group = c.benchmark_group("propose_and_select");
    let config = SplitConfig::default();
    for (name, data) in [
        ("regression", ridge_data(2_000, 5, 2)),
        ("classification", ridge_labels(2_000, 5, 2)),
    ] {
        let node = NodeData::new(&data, data.all_indices());
        group.bench_function(name, |b| {
            b.iter_batched(
                || stream(3, 0),
                |mut rng| propose_and_select(&node, &data, &config, data.n_samples(), &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, threshold_scan, node_split);
criterion_main!(benches);
