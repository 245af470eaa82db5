use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sparse_rank::exactlin::{rank_exact, rank_mod_p, PrimeSet};
use sparse_rank::gradcode::{decoding_error, least_squares_error, CG_REL_TOL};
use sparse_rank::peel::karp_sipser;
use sparse_rank_bench::{decoding_case, graph};

fn rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_mod_p");
    group.sample_size(10);
    let p = PrimeSet::shared().primes()[0];
    for n in [250, 500, 1000] {
        let a = graph(n, 20.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| rank_mod_p(a, p)));
    }
    group.finish();
    let a = graph(1000, 20.0);
    c.bench_function("rank_exact/1000", |b| b.iter(|| rank_exact(&a).unwrap()));
}

fn peeling(c: &mut Criterion) {
    let mut group = c.benchmark_group("karp_sipser");
    for n in [10_000, 100_000] {
        let a = graph(n, 3.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| karp_sipser(a).unwrap()));
    }
    group.finish();
}

fn decoding(c: &mut Criterion) {
    let mut group = c.benchmark_group("decoding");
    group.sample_size(10);
    let (a, set) = decoding_case(512, 2, 8, 0.1);
    group.bench_function("qr/512", |b| b.iter(|| least_squares_error(&a, &set).unwrap()));
    group.bench_function("qr_and_cg/512", |b| b.iter(|| decoding_error(&a, &set, CG_REL_TOL).unwrap()));
    group.finish();
}

criterion_group!(benches, rank, peeling, decoding);
criterion_main!(benches);
