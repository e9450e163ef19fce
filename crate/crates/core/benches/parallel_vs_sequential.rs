use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use strata_core::dh::{all_densities, mc_fiber_volume_with};
use strata_core::fixtures::{prism_example, random_toric, RandomToricParams};
use strata_core::linalg::{rat, ratio};
use strata_core::par::Execution;
use strata_core::toric::hamiltonian_stratification_with;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn stratify(c: &mut Criterion) {
    let mut g = c.benchmark_group("stratify");
    g.sample_size(10);
    // a 4-dimensional instance with a 2-dimensional image and ~70 strata
    let a = random_toric(14, RandomToricParams::default()).action;
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "seed14"), &exec, |b, &exec| {
            b.iter(|| hamiltonian_stratification_with(&a, exec).unwrap())
        });
    }
    g.finish();
}

fn densities(c: &mut Criterion) {
    let mut g = c.benchmark_group("densities");
    g.sample_size(10);
    let a = random_toric(14, RandomToricParams::default()).action;
    let s = hamiltonian_stratification_with(&a, Execution::Parallel).unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "seed14"), &exec, |b, &exec| {
            b.iter(|| all_densities(&a, &s, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    let a = prism_example();
    let x = [ratio(3, 2), rat(1)];
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "1e5"), &exec, |b, &exec| {
            b.iter(|| mc_fiber_volume_with(&a, &x, 100_000, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stratify, densities, monte_carlo);
criterion_main!(benches);
