use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mdpalign::search::{random_mdp, DEFAULT_CAP};
use mdpalign::{
    enumerate_reductions, maximal_reduction, search_alignment, solve_optimal, verify_reduction,
    CriterionMode, SearchConfig,
};
use mdpalign_bench::planted_pair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for n in [8, 32, 128] {
        let m = random_mdp(&mut ChaCha8Rng::seed_from_u64(n as u64), n, 4, 0.95);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| solve_optimal(m, CriterionMode::Stationary).unwrap())
        });
    }
    group.finish();
}

fn verify(c: &mut Criterion) {
    let (mx, my, r) = planted_pair(16, 2, 1);
    c.bench_function("verify/32", |b| {
        b.iter(|| verify_reduction(&mx, &my, &r).unwrap())
    });
}

fn enumerate(c: &mut Criterion) {
    let (mx, my, _) = planted_pair(2, 2, 3);
    c.bench_function("enumerate/4x2", |b| {
        b.iter(|| enumerate_reductions(&mx, &my, DEFAULT_CAP).unwrap())
    });
}

fn anneal(c: &mut Criterion) {
    let (mx, my, _) = planted_pair(3, 2, 5);
    let pi_y = my.covering_policy();
    let cfg = SearchConfig::default().with_seed(5);
    c.bench_function("anneal/6x3", |b| {
        b.iter(|| search_alignment(&mx, &my, &pi_y, &cfg).unwrap())
    });
}

fn maximal(c: &mut Criterion) {
    let (mx, _, _) = planted_pair(8, 2, 7);
    c.bench_function("maximal/16", |b| b.iter(|| maximal_reduction(&mx).unwrap()));
}

criterion_group!(benches, solve, verify, enumerate, anneal, maximal);
criterion_main!(benches);
