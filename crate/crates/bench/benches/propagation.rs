use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmt_bench::{chain_engine, star_engine};
use qmt_core::fixtures::random;
use qmt_core::oracle::{global_combine_engine, DEFAULT_ORACLE_MAX_FRAME};

fn dempster(c: &mut Criterion) {
    let mut group = c.benchmark_group("dempster");
    for n in [6, 10, 14] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let frame = random::frame(n);
        let a = random::mass(&mut rng, &frame, 16);
        let b = random::mass(&mut rng, &frame, 16);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| a.combine(&b))
        });
    }
    group.finish();
}

fn propagate(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagate_batch");
    // Chain frames have 2^(n+1) elements; 5 links is the 64-element limit.
    for n in [3, 4, 5] {
        let engine = chain_engine(n);
        group.bench_with_input(BenchmarkId::new("chain", n), &n, |bench, _| {
            bench.iter(|| engine.clone().propagate_batch().expect("no conflict"))
        });
    }
    for k in [3, 4, 5] {
        let engine = star_engine(k);
        group.bench_with_input(BenchmarkId::new("star", k), &k, |bench, _| {
            bench.iter(|| engine.clone().propagate_batch().expect("no conflict"))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_global_combine");
    // The oracle caps frames at 16 elements.
    for n in [1, 2, 3] {
        let engine = chain_engine(n);
        group.bench_with_input(BenchmarkId::new("chain", n), &n, |bench, _| {
            bench.iter(|| global_combine_engine(&engine, DEFAULT_ORACLE_MAX_FRAME).expect("fits"))
        });
    }
    group.finish();
}

criterion_group!(benches, dempster, propagate, oracle);
criterion_main!(benches);
