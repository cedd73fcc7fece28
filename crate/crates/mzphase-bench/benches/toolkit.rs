//! Hot paths of the toolkit: the special-function layer, the quadrature
//! ladder behind the homodyne information, the counting sums, the density
//! matrix oracle, the samplers, and a full likelihood maximization.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use mzphase::fisher_c::{cfi_counting, cfi_homodyne, draw_samples, mle, MleOptions};
use mzphase::fisher_q::{qfi, qfi_numeric_oracle};
use mzphase::quad::GaussHermite;
use mzphase::specfun::lambert_w0;
use mzphase::states::alpha_from_mean_photons;
use mzphase::wigner::reduced_wigner_ecs;
use mzphase::{DephasingParams, InterferometerParams, MeasurementScheme, StateFamily};

fn ecs_ten_photons(loss_p: f64) -> InterferometerParams {
    let alpha = alpha_from_mean_photons(StateFamily::Ecs, 10.0).unwrap();
    InterferometerParams::from_differential(alpha, 0.7, 0.0, loss_p).unwrap()
}

fn special_functions(c: &mut Criterion) {
    c.bench_function("lambert_w0 across the principal branch", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            let mut x = 0.01;
            while x < 50.0 {
                acc += lambert_w0(black_box(x)).unwrap();
                x += 0.37;
            }
            acc
        })
    });

    c.bench_function("gauss-hermite rule construction, 512 nodes", |b| {
        b.iter(|| GaussHermite::new(black_box(512)))
    });
}

fn fisher_information(c: &mut Criterion) {
    let deph = DephasingParams::NONE;
    let lossy = ecs_ten_photons(0.05);

    c.bench_function("homodyne information, ECS, ten photons, 5% loss", |b| {
        b.iter(|| cfi_homodyne(StateFamily::Ecs, black_box(&lossy), &deph).unwrap())
    });

    c.bench_function("counting information, ECS, ten photons, 5% loss", |b| {
        b.iter(|| cfi_counting(StateFamily::Ecs, black_box(&lossy), &deph).unwrap())
    });

    c.bench_function("quantum bound, closed form, QWP with dephasing", |b| {
        let deph = DephasingParams::new(0.3, 0.2).unwrap();
        b.iter(|| qfi(StateFamily::Qwp, black_box(4.0), 0.1, &deph).unwrap())
    });

    c.bench_function("quantum bound, density-matrix oracle, alpha 2", |b| {
        let params = InterferometerParams::from_differential(2.0, 0.7, 0.0, 0.1).unwrap();
        b.iter(|| qfi_numeric_oracle(StateFamily::Ecs, black_box(&params), &deph, 60).unwrap())
    });
}

fn sampling_and_estimation(c: &mut Criterion) {
    let deph = DephasingParams::NONE;
    let lossy = ecs_ten_photons(0.05);

    c.bench_function("homodyne sampler, ECS, 10k records", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            draw_samples(StateFamily::Ecs, MeasurementScheme::Homodyne, &lossy, &deph, 10_000, seed)
                .unwrap()
        })
    });

    c.bench_function("counting sampler, ECS, 10k records", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            draw_samples(StateFamily::Ecs, MeasurementScheme::Counting, &lossy, &deph, 10_000, seed)
                .unwrap()
        })
    });

    c.bench_function("likelihood maximization over 1k homodyne records", |b| {
        let records =
            draw_samples(StateFamily::Ecs, MeasurementScheme::Homodyne, &lossy, &deph, 1_000, 42)
                .unwrap();
        let opts = MleOptions::default();
        b.iter_batched(
            || records.clone(),
            |s| mle(StateFamily::Ecs, &s, black_box(&lossy), &deph, &opts).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn phase_space(c: &mut Criterion) {
    c.bench_function("reduced Wigner grid, 200 x 200", |b| {
        let params = InterferometerParams::from_differential(2.0, 0.5, 0.0, 0.0).unwrap();
        b.iter(|| reduced_wigner_ecs(black_box(&params), 8.0, 200).unwrap())
    });
}

criterion_group!(
    benches,
    special_functions,
    fisher_information,
    sampling_and_estimation,
    phase_space
);
criterion_main!(benches);
