use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qso_bench::{path_model, start};
use qso_core::sampling::random_skew;
use qso_core::{apply, apply_volterra, iterate, reduce, IterateConfig, QsoOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn apply_generated(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_generated");
    for (components, len) in [(2, 1), (2, 3), (3, 3), (2, 5)] {
        let op = QsoOperator::generated(path_model(components, len, 1));
        let x = start(op.dim(), 2);
        group.bench_with_input(BenchmarkId::from_parameter(op.dim()), &x, |b, x| {
            b.iter(|| apply(&op, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn apply_explicit(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_explicit");
    for (components, len) in [(2, 1), (2, 2), (3, 2)] {
        let op = QsoOperator::generated(path_model(components, len, 1));
        let dense = QsoOperator::explicit(op.materialize(64).unwrap()).unwrap();
        let x = start(op.dim(), 2);
        group.bench_with_input(BenchmarkId::from_parameter(op.dim()), &x, |b, x| {
            b.iter(|| apply(&dense, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn volterra(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_volterra");
    for n in [4, 16, 64, 256] {
        let a = random_skew(&mut ChaCha8Rng::seed_from_u64(3), n);
        let x = start(n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| apply_volterra(&a, black_box(x)).unwrap())
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("iterate_1000");
    group.sample_size(10);
    let config = IterateConfig {
        stop_on_convergence: false,
        ..IterateConfig::steps(1000)
    };
    let op = QsoOperator::generated(path_model(2, 3, 5));
    let x = start(op.dim(), 6);
    group.bench_function("generated_64", |b| {
        b.iter(|| iterate(&op, black_box(&x), &config).unwrap())
    });
    let a = random_skew(&mut ChaCha8Rng::seed_from_u64(7), 64);
    let y = start(64, 8);
    group.bench_function("skew_64", |b| {
        b.iter(|| iterate(&a, black_box(&y), &config).unwrap())
    });
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let model = path_model(3, 4, 9);
    c.bench_function("reduce_3x16", |b| b.iter(|| reduce(black_box(&model))));
}

criterion_group!(
    benches,
    apply_generated,
    apply_explicit,
    volterra,
    trajectories,
    reduction
);
criterion_main!(benches);
