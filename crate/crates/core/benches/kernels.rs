//! One worker against the full pool on the heavy kernels. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasespace::dynamics::{propagate_moyal_exact, Potential};
use phasespace::states::cat_state;
use phasespace::tomography::{forward_tomogram, inverse_tomogram};
use phasespace::wigner::wigner_transform;
use phasespace::PhaseGrid;

fn kernels(c: &mut Criterion) {
    let g = PhaseGrid::isotropic(256, 1.0, 1.0).unwrap();
    let psi = cat_state(&g, 3.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let w = wigner_transform(&psi).unwrap();
    let angles: Vec<f64> = (0..32).map(|i| i as f64 * PI / 32.0).collect();
    let tomo = forward_tomogram(&w, &angles).unwrap();
    let v = Potential::Quartic { lambda: 0.1 };

    // at least two workers so the comparison exists even on a single core
    let counts = [1, rayon::current_num_threads().max(2)];
    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for &workers in &counts {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        group.bench_with_input(BenchmarkId::new("wigner_transform", workers), &workers, |b, _| {
            b.iter(|| pool.install(|| wigner_transform(&psi).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("moyal_step", workers), &workers, |b, _| {
            b.iter(|| pool.install(|| propagate_moyal_exact(&w, &v, 1e-3, 1).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("forward_tomogram", workers), &workers, |b, _| {
            b.iter(|| pool.install(|| forward_tomogram(&w, &angles).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("inverse_tomogram", workers), &workers, |b, _| {
            b.iter(|| pool.install(|| inverse_tomogram(&tomo, &g).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
