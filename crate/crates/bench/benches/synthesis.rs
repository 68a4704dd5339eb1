use bbcool::switching::switching_curves;
use bbcool::synthesis::{solve_turn_ratio, synthesize, time_one_switch, DEFAULT_TOL};
use bbcool_bench::{bounds, grid, label, CASES};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn one_switch(c: &mut Criterion) {
    let b = bounds(1.0, 8.0);
    c.bench_function("time_one_switch", |bench| bench.iter(|| time_one_switch(black_box(9.0), &b)));
}

fn turn_ratio(c: &mut Criterion) {
    let b = bounds(1.0, 50.0);
    let mut group = c.benchmark_group("solve_turn_ratio");
    for n in [1u32, 2, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, &n| {
            bench.iter(|| solve_turn_ratio(black_box(12.0), &b, n, DEFAULT_TOL))
        });
    }
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize");
    for case in CASES {
        let b = bounds(case.0, case.1);
        group.bench_function(label(case), |bench| bench.iter(|| synthesize(black_box(case.2), &b)));
    }
    group.finish();
}

fn curves(c: &mut Criterion) {
    let b = bounds(1.0, 8.0);
    let g = grid(1.05, 10.0, 100);
    c.bench_function("switching_curves_100x50", |bench| bench.iter(|| switching_curves(&b, &g, 50)));
}

criterion_group!(benches, one_switch, turn_ratio, synthesis, curves);
criterion_main!(benches);
