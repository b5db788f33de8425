use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use structctl::gen::{generate, GenSpec, Model};
use structctl::{greedy, karp_sipser, max_matching, one_sided_karp_sipser};

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("er2");
    group.sample_size(10);
    for n in [10_000usize, 100_000] {
        let net = generate(&GenSpec::new(Model::ErDirected, n, 2.0, 1)).unwrap();
        group.bench_with_input(BenchmarkId::new("greedy", n), &net, |b, g| b.iter(|| greedy(black_box(g), 3)));
        group.bench_with_input(BenchmarkId::new("ks", n), &net, |b, g| b.iter(|| karp_sipser(black_box(g), 3)));
        group.bench_with_input(BenchmarkId::new("oks", n), &net, |b, g| {
            b.iter(|| one_sided_karp_sipser(black_box(g), 3))
        });
        group.bench_with_input(BenchmarkId::new("hopcroft_karp", n), &net, |b, g| b.iter(|| max_matching(black_box(g))));
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for model in [Model::ErDirected, Model::UfsDirected] {
        let spec = GenSpec::new(model, 100_000, 2.0, 1);
        group.bench_function(format!("{model:?}"), |b| b.iter(|| generate(black_box(&spec)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, matching, generation);
criterion_main!(benches);
