//! Sequential vs. rayon execution of the three batch workloads.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zollgeo::batch::{self, Execution};
use zollgeo::darboux::{scan, uniform_t_grid, ScanOptions};
use zollgeo::geodesics::sample_initial_states;
use zollgeo::returnmap::{build_report, ReturnMapOptions};
use zollgeo::verify::period_entry;
use zollgeo::{HFunction, MetricOfRevolution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn metric() -> MetricOfRevolution {
    MetricOfRevolution::zoll(HFunction::HalfSineExample)
}

fn bench_darboux_scan(c: &mut Criterion) {
    let m = metric();
    let grid = uniform_t_grid(400);
    let mut group = c.benchmark_group("darboux_scan_400");
    for (name, execution) in MODES {
        let opts = ScanOptions {
            execution,
            ..ScanOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| scan(black_box(&m), black_box(&grid), &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_random_periods(c: &mut Criterion) {
    let m = metric();
    let initials = sample_initial_states(7, 32);
    let opts = Default::default();
    let mut group = c.benchmark_group("random_periods_32");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                batch::map(execution, black_box(&initials), |st| {
                    period_entry(&m, st, &opts, 0.1)
                })
            })
        });
    }
    group.finish();
}

fn bench_return_map(c: &mut Criterion) {
    let m = metric();
    let mut group = c.benchmark_group("return_map_8x8");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = ReturnMapOptions {
            execution,
            ..ReturnMapOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_report(black_box(&m), 8, 8, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().measurement_time(Duration::from_secs(3));
    targets = bench_darboux_scan, bench_random_periods, bench_return_map
}
criterion_main!(benches);
