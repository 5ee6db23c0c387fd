use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pwcalc_bench::wiener;
use pwcalc_core::bdg::certify_path;
use pwcalc_core::integration::{capital_process, witness_strategy_qv};
use pwcalc_core::partitions::lebesgue_sequence;
use pwcalc_core::quadvar::simple_qv;
use pwcalc_core::truncvar::ttv_sweep;
use pwcalc_core::GridSpec;

fn partitions(c: &mut Criterion) {
    let path = wiener(16, 1);
    let mut group = c.benchmark_group("lebesgue_sequence");
    for m in [4u32, 8, 10] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| lebesgue_sequence(black_box(&path), GridSpec::dyadic(m)))
        });
    }
    group.finish();
}

fn quadratic_variation(c: &mut Criterion) {
    let path = wiener(16, 2);
    let seq = lebesgue_sequence(&path, GridSpec::dyadic(8));
    c.bench_function("simple_qv/m=8", |b| b.iter(|| simple_qv(black_box(&path), black_box(&seq))));
}

fn truncated_variation(c: &mut Criterion) {
    let path = wiener(16, 3);
    let mut group = c.benchmark_group("ttv_sweep");
    for k in [4u32, 12] {
        let cut = 1.0 / f64::from(k * k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &cut, |b, &cut| {
            b.iter(|| ttv_sweep(black_box(&path), cut, 0.0, 1.0).unwrap())
        });
    }
    group.finish();
}

fn certificates(c: &mut Criterion) {
    let path = wiener(12, 4);
    let mut group = c.benchmark_group("certify_path");
    for m in [4u32, 6] {
        let seq = lebesgue_sequence(&path, GridSpec::dyadic(m));
        group.bench_with_input(BenchmarkId::new("p=1", m), &seq, |b, seq| {
            b.iter(|| certify_path(&path, black_box(seq), 1.0, true).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("p=2", m), &seq, |b, seq| {
            b.iter(|| certify_path(&path, black_box(seq), 2.0, true).unwrap())
        });
    }
    group.finish();
}

fn capital(c: &mut Criterion) {
    let path = wiener(16, 5);
    let seq = lebesgue_sequence(&path, GridSpec::dyadic(8));
    let strategy = witness_strategy_qv(&path, &seq, 2.0 * path.max_abs() + 1.0).unwrap();
    c.bench_function("capital_process/witness m=8", |b| {
        b.iter(|| capital_process(black_box(&strategy), black_box(&path)))
    });
}

criterion_group!(benches, partitions, quadratic_variation, truncated_variation, certificates, capital);
criterion_main!(benches);
