use std::hint::black_box;

use cbf_core::fields::{to_physical, to_spectral, Grid};
use cbf_core::integrator::{step, SimulationConfig};
use cbf_core::operators::{absorption_self, convective, leray_project};
use cbf_core::random::random_field;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 3] = [16, 32, 64];

fn field(n: usize) -> cbf_core::SpectralField {
    let g = Grid::new(n).unwrap();
    random_field(g, &mut ChaCha8Rng::seed_from_u64(n as u64), n / 3, 1.5, true)
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform_round_trip");
    for n in SIZES {
        let u = field(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| to_spectral(&to_physical(black_box(u))))
        });
    }
    group.finish();
}

fn nonlinear(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinear");
    group.sample_size(20);
    for n in SIZES {
        let u = field(n);
        group.bench_with_input(BenchmarkId::new("convective", n), &u, |b, u| {
            b.iter(|| convective(black_box(u), u).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("absorption_r3", n), &u, |b, u| {
            b.iter(|| absorption_self(black_box(u), 3.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("absorption_r2.5", n), &u, |b, u| {
            b.iter(|| absorption_self(black_box(u), 2.5).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("leray", n), &u, |b, u| {
            b.iter(|| leray_project(black_box(u)))
        });
    }
    group.finish();
}

fn time_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    for n in [16, 32] {
        let cfg = SimulationConfig::new(n, 1.0, 0.1, 1.0, 3.0, 1.0, 0.01);
        let u = field(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| step(black_box(u), 0.0, 0.01, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, nonlinear, time_step);
criterion_main!(benches);
