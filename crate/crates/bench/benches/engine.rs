use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use microformal::brackets::{derived_bracket_direct, derived_bracket_nested};
use microformal::geometry::FiberKind;
use microformal::microformal::{change_target_coords, compose, pullback};
use microformal::Caps;
use microformal_bench::{compose_case, coords_case, derived_case, pullback_case};
use std::hint::black_box;

fn pullbacks(c: &mut Criterion) {
    let mut group = c.benchmark_group("pullback");
    for (dim, order) in [(1, 2), (1, 4), (2, 2), (2, 3)] {
        let (rel, f) = pullback_case(dim, 2);
        group.bench_with_input(BenchmarkId::new(format!("dim{dim}"), order), &order, |b, &order| {
            b.iter(|| pullback(black_box(&rel), black_box(&f), order).unwrap())
        });
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose");
    for dim in [1, 2] {
        let (outer, inner) = compose_case(dim);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| compose(black_box(&outer), black_box(&inner), Caps::fiber(2)).unwrap())
        });
    }
    group.finish();
}

fn derived(c: &mut Criterion) {
    let mut group = c.benchmark_group("derived bracket");
    for arity in 1..=3 {
        let (h, args) = derived_case(FiberKind::Cotangent, arity);
        group.bench_with_input(BenchmarkId::new("direct", arity), &arity, |b, _| {
            b.iter(|| derived_bracket_direct(black_box(&h), black_box(&args)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("nested", arity), &arity, |b, _| {
            b.iter(|| derived_bracket_nested(black_box(&h), black_box(&args)).unwrap())
        });
    }
    group.finish();
}

fn coordinate_change(c: &mut Criterion) {
    let mut group = c.benchmark_group("change coords");
    for order in [3, 5] {
        let (rel, cc, nt) = coords_case(order);
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, _| {
            b.iter(|| change_target_coords(black_box(&rel), &cc, &nt).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pullbacks, composition, derived, coordinate_change);
criterion_main!(benches);
