use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphon_opinion::{
    cut_norm_with, graphon::sample_network_with, ode::convergence_study_with, ode::rhs_into, simulate, solve_many,
    Execution, Partition, PiecewiseFn, SimConfig, StepGraphon,
};
use nalgebra::DMatrix;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn graphon(n: usize) -> StepGraphon {
    let blocks = DMatrix::from_fn(n, n, |i, j| (((i * 7 + j * 7 + i * j) % 11) as f64 - 5.0) / 5.0);
    StepGraphon::with_tight_bound(Partition::uniform(n).unwrap(), blocks).unwrap()
}

fn linear(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
}

fn bench_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for m in [512, 2048] {
        let net = sample_network_with(&graphon(8), m, Execution::default()).unwrap();
        let u = linear(m);
        let mut out = vec![0.0; m];
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, _| b.iter(|| rhs_into(&net, &u, &mut out, exec).unwrap()));
        }
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let m = 1024;
    let net = sample_network_with(&graphon(8), m, Execution::default()).unwrap();
    let u0 = linear(m);
    for (name, exec) in POLICIES {
        let cfg = SimConfig::new(0.01, 0.5).unwrap().with_execution(exec);
        group.bench_function(name, |b| b.iter(|| simulate(&net, &u0, &cfg).unwrap()));
    }
    group.finish();
}

fn bench_cut_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("cut_norm");
    group.sample_size(10);
    for n in [14, 16] {
        let g = graphon(n);
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| b.iter(|| cut_norm_with(&g, exec).unwrap()));
        }
    }
    group.finish();
}

fn bench_convergence(c: &mut Criterion) {
    let mut group = c.benchmark_group("convergence_study");
    group.sample_size(10);
    let g = graphon(4);
    let u0 = PiecewiseFn::from_fn_midpoints(64, |x| x * x).unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| convergence_study_with(&g, &u0, &[64, 128, 256, 512], 0.5, 0.01, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_solve_many(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_many");
    let g = graphon(12);
    let u0 = PiecewiseFn::from_fn_midpoints(600, |x| (6.0 * x).sin()).unwrap();
    let times: Vec<f64> = (0..64).map(|k| k as f64 * 0.1).collect();
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| b.iter(|| solve_many(&g, &u0, &times, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_rhs, bench_simulate, bench_cut_norm, bench_convergence, bench_solve_many);
criterion_main!(benches);
