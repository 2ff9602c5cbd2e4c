//! Sequential vs data-parallel execution on the three hot loops.
//!
//! With `--no-default-features` both arms run sequentially, which gives the
//! overhead of the dispatch itself.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Vector3;
use sgk_core::dynamics::{DeltaP, IntegratorConfig};
use sgk_core::gauge::curvature::PlaquetteOptions;
use sgk_core::gauge::topology::sphere_flux;
use sgk_core::gauge::{curvature_map, monopole_curvature, CurvatureMethod, Grid, GridAxis, SphereQuadrature};
use sgk_core::scenarios::{Field, RashbaScenario, SmoothRandomField, ZeemanScenario};
use sgk_core::spectral::SpinCharge;
use sgk_core::transport::{run_ensemble, EnsembleSpec, Sampler};
use sgk_core::{Constants, Execution, PhasePoint};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn curvature_grid(c: &mut Criterion) {
    let field = SmoothRandomField::sample(3, Vector3::new(0.0, 0.0, 1.5), 4, 0.4, 1.0, 0.5);
    let scn = ZeemanScenario::new(3, Field::Modes(field), Constants::default()).unwrap();
    let axes = vec![
        GridAxis { axis: 3, lo: -1.0, hi: 1.0, count: 24 },
        GridAxis { axis: 4, lo: -1.0, hi: 1.0, count: 24 },
    ];
    let grid = Grid::new(PhasePoint::origin(3), axes).unwrap();
    let mut group = c.benchmark_group("curvature_map");
    for (label, method) in [
        ("split_form", CurvatureMethod::SplitForm(None)),
        ("plaquette", CurvatureMethod::Plaquette(PlaquetteOptions::default())),
    ] {
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, mode), &exec, |b, &exec| {
                b.iter(|| black_box(curvature_map(&scn, &grid, &method, exec)))
            });
        }
    }
    group.finish();
}

fn flux(c: &mut Criterion) {
    let s = SpinCharge(0.5);
    let f = move |b: &Vector3<f64>| monopole_curvature(b, s);
    let quad = SphereQuadrature { polar: 96, azimuthal: 192, ..SphereQuadrature::default() };
    let mut group = c.benchmark_group("sphere_flux");
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| {
            b.iter(|| black_box(sphere_flux(&f, &Vector3::zeros(), 1.0, &quad, exec).unwrap()))
        });
    }
    group.finish();
}

fn ensemble(c: &mut Criterion) {
    let k = Constants { hbar: 1e-3, rho: 0.8, chi: 1.3, ..Constants::default() };
    let scn = RashbaScenario::new(Vector3::new(0.6, 0.0, 0.0), 0.9, k).unwrap();
    let em = scn.em();
    let spec = EnsembleSpec {
        sampler: Sampler::Random {
            p_min: vec![0.3, 0.0],
            p_max: vec![0.9, 0.0],
            r_min: vec![-1.0, -1.0],
            r_max: vec![1.0, 1.0],
            count: 32,
        },
        seed: 7,
        t0: 0.0,
        config: IntegratorConfig { duration: 0.2, step: 0.01, delta_p: DeltaP::SpinTexture, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    };
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| b.iter(|| black_box(run_ensemble(&scn, Some(&em), &spec, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, curvature_grid, flux, ensemble);
criterion_main!(benches);
