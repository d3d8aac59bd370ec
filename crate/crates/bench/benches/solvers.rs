//! Hot paths: the minimax solve, mean-power solves at a small and a large
//! exponent, and the cycle certificate on a shifted-diagonal plan.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linfty_ot::{
    check_cyclically_monotone, solve_bottleneck, solve_p, ArcOrder, Cost, Coupling,
    DiscreteMeasure, Point,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cloud(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure {
    let points = (0..n)
        .map(|_| {
            Point::new(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).unwrap()
        })
        .collect();
    DiscreteMeasure::uniform(points).unwrap()
}

fn bench_bottleneck(c: &mut Criterion) {
    let cost = Cost::euclidean(2);
    let mut group = c.benchmark_group("solve_bottleneck");
    for &n in &[16usize, 64] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mu = cloud(&mut rng, n);
        let nu = cloud(&mut rng, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_bottleneck(&mu, &nu, &cost).unwrap().value)
        });
    }
    group.finish();
}

fn bench_solve_p(c: &mut Criterion) {
    let cost = Cost::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mu = cloud(&mut rng, 20);
    let nu = cloud(&mut rng, 20);
    let mut group = c.benchmark_group("solve_p");
    for &p in &[2.0f64, 64.0] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| solve_p(&mu, &nu, &cost, p, ArcOrder::Forward).unwrap().value)
        });
    }
    group.finish();
}

fn bench_cycle_certificate(c: &mut Criterion) {
    let cost = Cost::euclidean(2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 40;
    let mu = cloud(&mut rng, n);
    let nu = cloud(&mut rng, n);
    // Shifted diagonal: the digraph check has to scan every pivot.
    let entries: Vec<(usize, usize, f64)> =
        (0..n).map(|i| (i, (i + 1) % n, 1.0 / n as f64)).collect();
    let plan = Coupling::new(mu, nu, entries).unwrap();
    c.bench_function("check_cyclically_monotone/40", |b| {
        b.iter(|| check_cyclically_monotone(&plan, &cost, 1e-9).holds)
    });
}

criterion_group!(benches, bench_bottleneck, bench_solve_p, bench_cycle_certificate);
criterion_main!(benches);
