//! Sequential against data-parallel evaluation of the property suites.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudospace::oracle::{run_suite_with, SuiteConfig};
use pseudospace::Exec;

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    for (suite, cases) in [
        ("words-confluence", 2000),
        ("words-strong", 400),
        ("flags-paths", 100),
    ] {
        let cfg = SuiteConfig::new(suite).cases(cases);
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(suite, format!("{exec:?}")),
                &cfg,
                |b, cfg| b.iter(|| run_suite_with(cfg, exec).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, suites);
criterion_main!(benches);
