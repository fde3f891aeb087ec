//! Parallel vs sequential throughput for the two embarrassingly parallel
//! workloads: the integer-range certificate scan and Frobenius root-density
//! sampling.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;
use num_rational::BigRational;

use arbdyn::certify::{self, CertifyOpts};
use arbdyn::exec::ExecMode;
use arbdyn::frobenius;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn bench_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("scan_range_1_600");
    g.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let opts = CertifyOpts {
            mode,
            ..CertifyOpts::default()
        };
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &opts,
            |b, opts| b.iter(|| certify::scan_range(1, 600, opts).unwrap()),
        );
    }
    g.finish();
}

fn bench_root_density(c: &mut Criterion) {
    let mut g = c.benchmark_group("root_density_n3_p5000");
    g.sample_size(10);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &mode,
            |b, &mode| {
                b.iter(|| {
                    frobenius::root_density_sample(&rat(1), &rat(1), 3, 3, 5000, mode).unwrap()
                })
            },
        );
    }
    g.finish();
}

criterion_group!(benches, bench_scan, bench_root_density);
criterion_main!(benches);
