use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crossdrift::diagnostics::energy;
use crossdrift::oracle::regularized_rhs;
use crossdrift::{run, velocities};
use crossdrift_bench::{blocks, interleaved};
use std::hint::black_box;

fn full_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_to_rest");
    g.sample_size(10);
    for n in [25, 50, 100, 200] {
        let s = blocks(n);
        g.bench_with_input(BenchmarkId::new("blocks", n), &s, |b, s| {
            b.iter(|| run(black_box(s), f64::INFINITY).unwrap())
        });
        let s = interleaved(n);
        g.bench_with_input(BenchmarkId::new("interleaved", n), &s, |b, s| {
            b.iter(|| run(black_box(s), f64::INFINITY).unwrap())
        });
    }
    g.finish();
}

fn per_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("per_state");
    for n in [100, 1000, 10_000] {
        let s = interleaved(n);
        g.bench_with_input(BenchmarkId::new("velocities", n), &s, |b, s| {
            b.iter(|| velocities(black_box(s), 1e-12))
        });
        g.bench_with_input(BenchmarkId::new("energy", n), &s, |b, s| b.iter(|| energy(black_box(s))));
    }
    let s = interleaved(1000);
    g.bench_function("regularized_rhs/1000", |b| {
        b.iter(|| regularized_rhs(black_box(&s), 1e-4).unwrap())
    });
    g.finish();
}

criterion_group!(benches, full_runs, per_step);
criterion_main!(benches);
