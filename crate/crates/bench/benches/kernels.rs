//! Benchmarks for the hot kernels: series composition/reversion, the
//! Grunsky block expansion, and hierarchy path throughput.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use loewner_core::scalar::C64;
use loewner_core::series::TruncatedTaylor;
use loewner_core::sle::coeff_hierarchy;
use std::hint::black_box;

fn sample_map(order: usize) -> TruncatedTaylor<C64> {
    let mut f = TruncatedTaylor::identity(order);
    for k in 2..=order {
        f.set_coeff(k, C64::new(0.4 / k as f64, 0.1 / (k * k) as f64));
    }
    f
}

fn bench_series(c: &mut Criterion) {
    let f = sample_map(32);
    let g = sample_map(32);
    c.bench_function("compose_n32", |b| {
        b.iter(|| black_box(f.compose(black_box(&g)).unwrap()))
    });
    c.bench_function("reversion_n32", |b| {
        b.iter(|| black_box(f.reversion().unwrap()))
    });
}

fn bench_grunsky(c: &mut Criterion) {
    let k = TruncatedTaylor::<C64>::koebe(33);
    c.bench_function("grunsky_koebe_n16", |b| {
        b.iter(|| black_box(loewner_core::grunsky::grunsky_disc(black_box(&k), 16).unwrap()))
    });
}

fn bench_hierarchy(c: &mut Criterion) {
    c.bench_function("hierarchy_path_n6_1000steps", |b| {
        b.iter_batched(
            || (),
            |_| black_box(coeff_hierarchy(2.0, 7, 6, 1.0, 1e-3, 0)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_series, bench_grunsky, bench_hierarchy);
criterion_main!(benches);
