use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ponder_core::constants::TWO_PI;
use ponder_core::model::DriftMatrix;
use ponder_core::spectral::{
    integrate_covariance, output_entanglement_spectrum, output_variance_at, QuadratureOptions,
    ThermalConvention,
};
use ponder_core::steadystate::{diffusion_matrix, solve_lyapunov};
use ponder_core::SystemParams;

fn log_grid_hz(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| TWO_PI * lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn bench_output_variance(c: &mut Criterion) {
    let p = SystemParams::default();
    c.bench_function("output_variance_at_100hz", |b| {
        b.iter(|| {
            output_variance_at(&p, black_box(TWO_PI * 100.0), ThermalConvention::Symmetrized)
                .unwrap()
        })
    });
}

fn bench_spectrum(c: &mut Criterion) {
    let p = SystemParams::default();
    let grid = log_grid_hz(10.0, 5e4, 500);
    c.bench_function("spectrum_500_points", |b| {
        b.iter(|| {
            output_entanglement_spectrum(&p, black_box(&grid), ThermalConvention::Symmetrized)
                .unwrap()
        })
    });
}

fn bench_lyapunov(c: &mut Criterion) {
    let p = SystemParams::default();
    let k = DriftMatrix::new(&p);
    let d = diffusion_matrix(&p, ThermalConvention::PaperLiteral);
    c.bench_function("solve_lyapunov", |b| {
        b.iter(|| solve_lyapunov(black_box(&k), black_box(&d)).unwrap())
    });
}

fn bench_integration(c: &mut Criterion) {
    let p = SystemParams::default();
    let opts = QuadratureOptions::default();
    c.bench_function("integrate_covariance", |b| {
        b.iter(|| {
            integrate_covariance(black_box(&p), ThermalConvention::Symmetrized, &opts).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_output_variance,
    bench_spectrum,
    bench_lyapunov,
    bench_integration
);
criterion_main!(benches);
