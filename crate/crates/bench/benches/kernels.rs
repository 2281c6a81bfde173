use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use recoil_bench::{erf_points, reference_exit, reference_window};
use recoil_core::{complex_erf, flux_scan, Apparatus, MomentumTransferDistribution, Propagator};
use std::hint::black_box;

fn erf(c: &mut Criterion) {
    let points = erf_points();
    c.bench_function("complex_erf/192 points", |b| {
        b.iter(|| points.iter().map(|&z| complex_erf(black_box(z)).unwrap()).sum::<num_complex::Complex64>())
    });
}

fn quadrature(c: &mut Criterion) {
    let ki = 2.0 * PI / 589e-9;
    let mandel = MomentumTransferDistribution::mandel(ki).unwrap();
    let gauss = MomentumTransferDistribution::general_gaussian(0.4, 0.8, ki).unwrap();
    let dp = 1.7 * 589e-9;
    c.bench_function("numeric visibility/mandel", |b| b.iter(|| mandel.numeric_visibility_phase(black_box(dp)).unwrap()));
    c.bench_function("numeric visibility/general gaussian", |b| {
        b.iter(|| gauss.numeric_visibility_phase(black_box(dp)).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let beam = Apparatus::reference().beam;
    let mut group = c.benchmark_group("propagate");
    group.sample_size(10);
    for log2 in [14u32, 17] {
        let exit = reference_exit(log2);
        let prop = Propagator::new(exit.grid());
        let kernel = prop.kernel(0.01, &beam).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(1usize << log2), &exit, |b, s| {
            b.iter(|| prop.apply(s, &kernel).unwrap())
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let beam = Apparatus::reference().beam;
    let exit = reference_exit(16);
    let state = Propagator::new(exit.grid()).propagate(&exit, 0.01, &beam).unwrap();
    let window = reference_window();
    c.bench_function("flux_scan/64 points", |b| b.iter(|| flux_scan(&state, &window, 32, 2).unwrap()));
}

criterion_group!(benches, erf, quadrature, propagation, scan);
criterion_main!(benches);
