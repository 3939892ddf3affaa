//! Sequential versus data-parallel execution on the two hot loops:
//! quasi-Monte Carlo weight integration and spanning-family
//! associativity checks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use starlab::kontsevich::{weight_with, KGraph, WeightOptions};
use starlab::liestar::cbh_star;
use starlab::moyal::moyal_star;
use starlab::{Exec, LieAlgebra, PoissonTensor};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn weights(c: &mut Criterion) {
    let g: KGraph = "[L,R][1,R]".parse().unwrap();
    let mut group = c.benchmark_group("qmc_weight");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "k2_1e5"), &exec, |b, &exec| {
            let opts = WeightOptions {
                threshold: 1.0,
                exec,
                ..WeightOptions::new(100_000, 42)
            };
            b.iter(|| weight_with(&g, opts).unwrap());
        });
    }
    group.finish();
}

fn assoc(c: &mut Criterion) {
    let moyal = moyal_star(&PoissonTensor::symplectic(4).unwrap(), 4).unwrap();
    let cbh = cbh_star(&LieAlgebra::builtin("so3").unwrap(), 4).unwrap();
    let mut group = c.benchmark_group("assoc_family");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "moyal4_deg3"), &exec, |b, &exec| {
            b.iter(|| assert!(moyal.assoc_witness(3, exec).is_none()));
        });
        group.bench_with_input(BenchmarkId::new(name, "cbh_so3_deg3"), &exec, |b, &exec| {
            b.iter(|| assert!(cbh.assoc_witness(3, exec).is_none()));
        });
    }
    group.finish();
}

criterion_group!(benches, weights, assoc);
criterion_main!(benches);
