//! Exhaustive scans under both execution strategies.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use erasing_dyn::catalog::{sigma3, sigma4};
use erasing_dyn::classifier::{check_completely_erasing, check_strongly_erasing, Budget};
use erasing_dyn::entropy::{max_vanishing_order, separated_family};
use erasing_dyn::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn vanishing_scan(c: &mut Criterion) {
    let s = sigma3();
    let mut g = c.benchmark_group("max_vanishing_order");
    for len in [12usize, 16] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, len), &len, |b, &len| {
                b.iter(|| max_vanishing_order(&s, len, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn classifier_scans(c: &mut Criterion) {
    let budget = Budget::default();
    let mut g = c.benchmark_group("classifier");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("strongly/sigma3", name), |b| {
            b.iter(|| check_strongly_erasing(&sigma3(), &budget, exec))
        });
        g.bench_function(BenchmarkId::new("completely/sigma4", name), |b| {
            b.iter(|| check_completely_erasing(&sigma4(), &budget, exec))
        });
    }
    g.finish();
}

fn separated_pairs(c: &mut Criterion) {
    let s = sigma3();
    let mut g = c.benchmark_group("separated_family");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "k2_n2"), |b| {
            b.iter(|| separated_family(&s, 2, 2, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, vanishing_scan, classifier_scans, separated_pairs);
criterion_main!(benches);
