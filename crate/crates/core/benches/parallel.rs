//! Rayon thread pool against a single-thread pool on the data-parallel
//! paths. Built without the `parallel` feature, only the sequential
//! variant is measured.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use zsa_core::levelset::{modulus_profiles, trace_level_curve, ProfileOptions, TraceOptions};
use zsa_core::strips::projection_interval;
use zsa_core::zerofinder::{find_zeros, scan_zeros, translation_number};
use zsa_core::{Family, Rectangle};

type Job = (&'static str, fn());

fn jobs() -> Vec<Job> {
    vec![
        ("find_zeros", || {
            let p = Family::G.build(8).unwrap();
            let r = Rectangle::new(-3.0, 2.0, 0.0, 60.0).unwrap();
            black_box(find_zeros(&p, &r, 1e-10).unwrap());
        }),
        ("scan_zeros", || {
            let p = Family::G.build(8).unwrap();
            black_box(scan_zeros(&p, (-3.0, 2.0), (0.0, 200.0), 10.0, 1e-10).unwrap());
        }),
        ("profiles", || {
            let opts = ProfileOptions {
                y_max: 500.0,
                step: None,
            };
            let xs = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0];
            black_box(modulus_profiles(7, &xs, &opts).unwrap());
        }),
        ("trace_level_curve", || {
            let opts = TraceOptions {
                check_loops: false,
                ..TraceOptions::default()
            };
            black_box(trace_level_curve(6, 0.3, &opts).unwrap());
        }),
        ("projection_interval", || {
            black_box(projection_interval(5, 1e-3, 1e-9).unwrap());
        }),
        ("translation_number", || {
            let p = Family::G.build(4).unwrap();
            black_box(translation_number(&p, 0.05, (-1.0, 0.0), 1e4).unwrap());
        }),
    ]
}

fn compare(c: &mut Criterion) {
    #[cfg(feature = "parallel")]
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for (name, job) in jobs() {
        let mut group = c.benchmark_group(name);
        group.sample_size(10);
        #[cfg(feature = "parallel")]
        {
            group.bench_function(BenchmarkId::new("rayon", rayon::current_num_threads()), |b| {
                b.iter(job)
            });
            group.bench_function(BenchmarkId::new("single_thread", 1), |b| {
                b.iter(|| single.install(job))
            });
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_function(BenchmarkId::new("sequential", 1), |b| b.iter(job));
        group.finish();
    }
}

criterion_group!(benches, compare);
criterion_main!(benches);
