use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use circlemap::dual_deriv::DualDerivativeTable;
use circlemap::grid::GridFn;
use circlemap::measures::TransferOperator;
use circlemap::{ba, conjugacy, measures, symbolic, LiftMap};
use circlemap_bench::{fs, trig};

fn partition_levels(c: &mut Criterion) {
    let m = trig();
    c.bench_function("partition_endpoints_trig_depth14", |b| {
        b.iter(|| symbolic::partition_endpoints(black_box(&m), 14).unwrap())
    });
    let f = fs();
    c.bench_function("partition_endpoints_fs_depth10", |b| {
        b.iter(|| symbolic::partition_endpoints(black_box(&f), 10).unwrap())
    });
}

fn dual_tables(c: &mut Criterion) {
    let m = trig();
    c.bench_function("dual_table_trig_depth12", |b| {
        b.iter(|| DualDerivativeTable::compute(black_box(&m), 12).unwrap())
    });
}

fn transfer_step(c: &mut Criterion) {
    let m = trig();
    let op = TransferOperator::new(&m, 1 << 14).unwrap();
    let psi = GridFn::constant(1 << 14, 0.5);
    c.bench_function("transfer_apply_grid_2pow14", |b| {
        b.iter_batched(
            || GridFn::constant(1 << 14, 1.0),
            |phi| op.apply(&psi, &phi).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("invariant_density_trig", |b| {
        b.iter(|| measures::invariant_density(black_box(&m), 1 << 12, 100, 1e-10).unwrap())
    });
}

fn conjugacy_and_ba(c: &mut Criterion) {
    let f = trig();
    let g = LiftMap::power(2).unwrap();
    c.bench_function("conjugacy_map_depth12", |b| {
        b.iter(|| conjugacy::conjugacy_map(black_box(&f), black_box(&g), 12).unwrap())
    });
    let h = ba::LineMap::periodic_lift(conjugacy::conjugacy_map(&f, &g, 10).unwrap()).unwrap();
    c.bench_function("beltrami_at_conjugacy_lift", |b| {
        b.iter(|| ba::beltrami_at(black_box(&h), 0.37, 0.05).unwrap())
    });
}

criterion_group!(benches, partition_levels, dual_tables, transfer_step, conjugacy_and_ba);
criterion_main!(benches);
