use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use structctl::asymptotics::{solve_fixed_point, solve_poisson_ks, GenFunc, DEFAULT_TOL};
use structctl::dynamics::{integrate, OdeSpec};
use structctl::{Algo, DegreeDist};

fn fixed_point(c: &mut Criterion) {
    for lambda in [1.0, std::f64::consts::E, 8.0] {
        let gf = GenFunc::new(DegreeDist::poisson(lambda).unwrap());
        c.bench_function(&format!("fixed_point_poisson_{lambda:.2}"), |b| {
            b.iter(|| solve_fixed_point(black_box(&gf), black_box(&gf), DEFAULT_TOL).unwrap())
        });
    }
    c.bench_function("poisson_ks_4", |b| b.iter(|| solve_poisson_ks(black_box(4.0)).unwrap()));
}

fn ode(c: &mut Criterion) {
    let mut group = c.benchmark_group("ode");
    group.sample_size(10);
    for algo in [Algo::Ks, Algo::Oks] {
        let spec = OdeSpec::poisson(algo, 4.0).unwrap().with_eps(1e-10);
        group.bench_function(algo.name(), |b| b.iter(|| integrate(black_box(&spec)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, fixed_point, ode);
criterion_main!(benches);
