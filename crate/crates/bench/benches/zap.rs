use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use nalgebra::DVector;
use seqzap_core::{
    batch_solve, generate_problem, GramInverse, OnlineState, ProblemSpec, ZapConfig,
};

fn seeded_gram(n: usize, m: usize) -> (GramInverse, DVector<f64>, DVector<f64>) {
    let mut p = generate_problem(ProblemSpec::new(n, 20.min(n), 1)).unwrap();
    let mut g = GramInverse::new(n).unwrap();
    let mut ys = Vec::with_capacity(m);
    for _ in 0..m {
        let (a, y) = p.next_measurement();
        g.append_row(&a).unwrap();
        ys.push(y);
    }
    let (next, _) = p.next_measurement();
    (g, DVector::from_vec(ys), next)
}

fn append_row(c: &mut Criterion) {
    let mut group = c.benchmark_group("append_row");
    for m in [16, 64, 128, 200] {
        let (g, _, next) = seeded_gram(256, m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter_batched(
                || g.clone(),
                |mut g| g.append_row(&next).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_projection");
    for m in [16, 64, 128] {
        let (g, y, x) = seeded_gram(256, m);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| g.apply_projection(&x, &y).unwrap())
        });
    }
    group.finish();
}

fn solves(c: &mut Criterion) {
    let cfg = ZapConfig::default();
    let (g, y, _) = seeded_gram(256, 80);
    c.bench_function("batch_solve_m80", |b| {
        b.iter(|| batch_solve(&g, &y, &cfg).unwrap())
    });

    c.bench_function("online_run_to_m80", |b| {
        b.iter(|| {
            let mut p = generate_problem(ProblemSpec::new(256, 20, 1)).unwrap();
            let mut s = OnlineState::new(256, &cfg).unwrap();
            while s.m() < 80 {
                let (a, y) = p.next_measurement();
                s.ingest_sample(&a, y, &cfg).unwrap();
            }
            s
        })
    });
}

criterion_group!(benches, append_row, projection, solves);
criterion_main!(benches);
