//! Sequential vs rayon fan-out of a multi-seed accuracy sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flowsketch::{Seed, Trace, ZipfSpec};
use flowsketch_bench::harness::accuracy_run;
use flowsketch_bench::runs::map_sequential;
use flowsketch_bench::{Algorithm, EstimatorParams};

const RUNS: u32 = 8;

fn sweep(c: &mut Criterion) {
    let trace = Trace::zipf(&ZipfSpec {
        n_items: 50_000,
        universe: 10_000,
        alpha: 1.0,
        seed: Seed(0),
    })
    .unwrap();
    let params = EstimatorParams::default();
    let mut group = c.benchmark_group("accuracy_sweep");
    group.sample_size(10);
    for algo in [Algorithm::Cms, Algorithm::NitroHash, Algorithm::SpaceSaving] {
        let one = |r: u32| accuracy_run(algo, &params, trace.items(), Seed(r as u64)).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", algo), &algo, |b, _| {
            b.iter(|| black_box(map_sequential(RUNS, one)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", algo), &algo, |b, _| {
            b.iter(|| black_box(flowsketch_bench::runs::map_parallel(RUNS, one)))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
