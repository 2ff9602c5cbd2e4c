use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use sgk_core::gauge::curvature::{h1_jacobian, tensor_of};
use sgk_core::gauge::phase::phase_distance;
use sgk_core::gauge::{
    adiabatic_connection, adiabatic_curvature_numeric, chern_charge, curvature_from_connection, curvature_m_space,
    dirac_phase, exact_connection, maxwell_residuals, monopole_curvature, nonabelian_curvature, phase_line_integral,
    pullback, pullback_curvature, regauge, Block, ConnectionField, ModelConnectionField, Regauged, SphereQuadrature,
};
use sgk_core::scenarios::fields::LinearField;
use sgk_core::scenarios::{Field, SmoothRandomField, SpinOrbitScenario, ZeemanScenario};
use sgk_core::spectral::{CMatrix, MatrixModel, SpinCharge, SpinModel, SpinRep};
use sgk_core::{Constants, Execution, PhasePoint, Result};

fn at(p: [f64; 3], r: [f64; 3], t: f64) -> PhasePoint {
    PhasePoint::new(&p, &r, t).unwrap()
}

fn field_point(b: Vector3<f64>) -> PhasePoint {
    PhasePoint::from_vectors(Vector3::zeros(), b, 0.0).unwrap()
}

fn random_zeeman(seed: u64) -> ZeemanScenario {
    let field = SmoothRandomField::sample(seed, Vector3::new(0.2, -0.1, 1.5), 3, 0.4, 1.0, 0.7);
    ZeemanScenario::new(3, Field::Modes(field), Constants::default()).unwrap()
}

fn constant_model() -> impl sgk_core::spectral::HamiltonianModel {
    let h = CMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.1, 0.05 * (i as f64 - j as f64))
        }
    });
    MatrixModel::new(3, 3, move |_: &PhasePoint| h.clone())
}

/// Smooth 3-band model with no special structure.
fn three_band() -> impl sgk_core::spectral::HamiltonianModel {
    MatrixModel::new(3, 3, |m: &PhasePoint| {
        let (p, r, t) = (m.p3(), m.r3(), m.t());
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a = c(0.3 * p.x + r.y.sin(), 0.2 * r.z);
        let b = c(0.1 * t.cos(), p.y * r.x);
        let d = c(0.4 * r.z, -0.3 * p.z);
        CMatrix::from_row_slice(
            3,
            3,
            &[c(-1.0 + r.x, 0.0), a, b, a.conj(), c(0.2 * p.x * p.x, 0.0), d, b.conj(), d.conj(), c(1.5 + t * 0.1, 0.0)],
        )
    })
}

#[test]
fn constant_hamiltonian_has_no_connection() {
    let model = constant_model();
    let a = exact_connection(&model, &at([0.1, 0.2, 0.3], [0.4, 0.5, 0.6], 0.7), 1e-4).unwrap();
    for comp in a.components() {
        assert!(comp.iter().all(|z| z.norm() < 1e-12));
    }
    let f = adiabatic_curvature_numeric(&model, &at([0.0; 3], [1.0; 3], 0.0), None).unwrap();
    assert_eq!(f.max_abs(), 0.0);
}

#[test]
fn zeeman_potential_vanishes_at_the_north_pole() {
    let scn = ZeemanScenario::field_space(Constants::default()).unwrap();
    let a = exact_connection(&scn, &field_point(Vector3::z()), 1e-5).unwrap().adiabatic();
    for band in 0..2 {
        for x in a.band_components(band) {
            assert!(x.abs() < 1e-10, "band {band}: {x}");
        }
    }
}

#[test]
fn exact_connection_is_hermitian_and_matches_adiabatic() {
    let model = three_band();
    let m = at([0.3, -0.2, 0.1], [0.4, 0.2, -0.3], 0.5);
    let exact = exact_connection(&model, &m, 1e-5).unwrap();
    assert!(exact.hermiticity_residual() < 1e-8);
    let halved = exact_connection(&model, &m, 5e-6).unwrap();
    for (a, b) in exact.components().iter().zip(halved.components()) {
        assert!((a - b).norm() < 1e-6);
    }
    let ad = adiabatic_connection(&model, &m, 1e-5, None).unwrap();
    let diag = exact.adiabatic();
    for band in 0..3 {
        for (x, y) in ad.band_components(band).iter().zip(diag.band_components(band)) {
            assert!((x - y).abs() < 1e-7);
        }
    }
}

#[test]
fn exact_curvature_vanishes() {
    let scn = random_zeeman(11);
    let m = at([0.2, 0.1, -0.3], [0.5, -0.4, 0.3], 0.2);
    let f = nonabelian_curvature(&scn, &m, 1e-4, true).unwrap();
    assert!(f.max_norm() < 1e-6, "{}", f.max_norm());
    // without the commutator the abelian part survives
    let broken = nonabelian_curvature(&scn, &m, 1e-4, false).unwrap();
    assert!(broken.max_norm() > 1e-3);
}

#[test]
fn time_only_field_has_no_curvature() {
    let field = Field::Linear(LinearField::ramp(Vector3::new(0.3, 0.0, 1.0), Vector3::new(0.0, 0.5, -0.2)));
    let scn = ZeemanScenario::new(3, field, Constants::default()).unwrap();
    let m = at([0.2, 0.3, -0.1], [1.0, 2.0, 3.0], 0.4);
    assert!(curvature_m_space(&scn, &m, None).unwrap().max_abs() < 1e-10);
    // wide plaquette: exact null, so only roundoff remains
    let f = adiabatic_curvature_numeric(&scn, &m, Some(1e-2)).unwrap();
    assert!(f.max_abs() < 1e-10, "{}", f.max_abs());
}

#[test]
fn radial_field_curvature_matches_the_monopole() {
    let scn = ZeemanScenario::field_space(Constants::default()).unwrap();
    let m = field_point(Vector3::new(0.0, 0.0, 1.0));
    let numeric = adiabatic_curvature_numeric(&scn, &m, None).unwrap();
    let want = scn.analytic(&m).unwrap().curvature;
    for band in 0..2 {
        let got = numeric.block(band, Block::RR);
        let exp = want.block(band, Block::RR);
        assert!((got - &exp).amax() < 1e-5 * exp.amax(), "band {band}");
    }
    let up = scn.up_band();
    let f = numeric.pseudovector(up, Block::RR);
    assert!((f - Vector3::new(0.0, 0.0, -0.5)).norm() < 1e-5);
}

#[test]
fn plaquette_agrees_with_split_form() {
    let scn = random_zeeman(5);
    for m in [at([0.1, 0.0, 0.2], [0.3, 0.2, -0.1], 0.0), at([-0.4, 0.2, 0.0], [1.0, -0.5, 0.2], 1.3)] {
        let oracle = curvature_m_space(&scn, &m, None).unwrap();
        let numeric = adiabatic_curvature_numeric(&scn, &m, None).unwrap();
        let rel = numeric.relative_difference(&oracle);
        assert!(rel < 1e-5, "{rel}");
        let neg = oracle.band(1) + oracle.band(0);
        assert!(neg.amax() < 1e-12);
    }
}

#[test]
fn orthogonal_fields_leave_momentum_flat() {
    let k = Constants { rho: 0.3, ..Constants::default() };
    let scn = SpinOrbitScenario::new(
        3,
        Field::uniform(Vector3::new(0.0, 0.0, 1.0)),
        Field::uniform(Vector3::new(0.7, 0.0, 0.0)),
        k,
    )
    .unwrap();
    let f = curvature_m_space(&scn, &at([0.3, -0.2, 0.5], [0.0; 3], 0.0), None).unwrap();
    for band in 0..2 {
        assert!(f.block(band, Block::PP).amax() < 1e-12);
    }
}

#[test]
fn pullback_of_the_monopole_is_the_split_form_curvature() {
    let map = |a: &[f64]| vec![a[0] + 0.3 * a[1] * a[1], a[1].sin() + 0.2, 1.0 + a[2] - 0.1 * a[0]];
    let model = SpinModel::new(
        3,
        SpinRep::Pauli,
        Constants::default(),
        |_: &PhasePoint| 0.0,
        move |m: &PhasePoint| {
            let b = map(m.r());
            Vector3::new(b[0], b[1], b[2])
        },
    );
    let s = SpinRep::Pauli.charges()[1];
    let f_b = |b: &[f64]| -> Result<DMatrix<f64>> {
        let v = monopole_curvature(&Vector3::new(b[0], b[1], b[2]), s)?;
        Ok(DMatrix::from_column_slice(3, 3, tensor_of(&v).as_slice()))
    };
    let a = [0.2, -0.3, 0.4];
    let got = pullback_curvature(map, f_b, &a, 1e-3).unwrap();
    let m = at([0.0; 3], a, 0.0);
    let want = curvature_m_space(&model, &m, None).unwrap().block(1, Block::RR);
    assert!((got - &want).amax() < 1e-9 * want.amax().max(1.0));
    // the h1 jacobian gives the same thing through the bare bilinear form
    let cols = h1_jacobian(&model, &m, 1e-3).unwrap();
    let j = DMatrix::from_fn(3, 3, |k, i| cols[3 + i][k]);
    let fb = f_b(&map(&a)).unwrap();
    assert!((pullback(&j, &fb) - want).amax() < 1e-9);
}

struct ConstantConnection;

impl ConnectionField for ConstantConnection {
    fn bands(&self) -> usize {
        1
    }
    fn adiabatic_at(&self, _m: &PhasePoint) -> Result<Vec<Vec<f64>>> {
        Ok(vec![vec![0.3, -1.2, 0.5, 2.0, 0.1, -0.7, 0.9]])
    }
}

#[test]
fn constant_connection_has_no_loop_phase() {
    let path: Vec<_> = [[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0], [0.0, 0.0]]
        .iter()
        .map(|q| at([q[0], 0.0, 0.0], [0.0, q[1], 0.0], 0.5 * q[0]))
        .collect();
    let phase = phase_line_integral(&ConstantConnection, &path, 0).unwrap();
    assert!(phase.raw.abs() < 1e-14);
}

fn latitude_loop(theta: f64, n: usize) -> Vec<PhasePoint> {
    (0..=n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            field_point(Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()))
        })
        .collect()
}

#[test]
fn latitude_loops_give_half_the_solid_angle() {
    let scn = ZeemanScenario::field_space(Constants::default()).unwrap();
    let charges = SpinRep::Pauli.charges();
    for theta in [PI / 4.0, PI / 2.0] {
        let path = latitude_loop(theta, 40000);
        let field = ModelConnectionField::for_path(&scn, &path).unwrap();
        let omega = 2.0 * PI * (1.0 - theta.cos());
        for (band, s) in charges.iter().enumerate() {
            let got = phase_line_integral(&field, &path, band).unwrap();
            let want = -s.value() * omega;
            assert!(phase_distance(got.raw, want) < 1e-6, "theta {theta} band {band}: {} vs {want}", got.raw);
        }
    }
}

#[test]
fn stokes_in_the_xy_plane() {
    let scn = random_zeeman(9);
    let center = [0.3, -0.2, 0.1];
    let radius = 0.05;
    let n = 20000;
    let path: Vec<_> = (0..=n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            at([0.0; 3], [center[0] + radius * phi.cos(), center[1] + radius * phi.sin(), center[2]], 0.0)
        })
        .collect();
    let field = ModelConnectionField::for_path(&scn, &path).unwrap();
    let gl = GaussLegendre::new(NonZeroUsize::new(12).unwrap());
    let nodes: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    let nphi = 24;
    for band in 0..2 {
        let mut flux = 0.0;
        for &(x, w) in &nodes {
            let rho = 0.5 * radius * (x + 1.0);
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let m = at([0.0; 3], [center[0] + rho * phi.cos(), center[1] + rho * phi.sin(), center[2]], 0.0);
                let f = curvature_m_space(&scn, &m, None).unwrap();
                flux += f.get(band, 3, 4) * w * 0.5 * radius * rho * 2.0 * PI / nphi as f64;
            }
        }
        let loop_phase = phase_line_integral(&field, &path, band).unwrap().raw;
        assert!((loop_phase - flux).abs() < 1e-5 * flux.abs(), "band {band}: {loop_phase} vs {flux}");
    }
}

#[test]
fn solenoid_phase() {
    let k = Constants { e: 0.7, hbar: 1.3, c: 2.0, ..Constants::default() };
    let flux = 0.9;
    let solenoid = move |r: &Vector3<f64>, _t: f64| {
        let rho2 = r.x * r.x + r.y * r.y;
        (0.0, Vector3::new(-r.y, r.x, 0.0) * (flux / (2.0 * PI * rho2)))
    };
    let circle = |cx: f64, radius: f64| -> Vec<(Vector3<f64>, f64)> {
        (0..=20000)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / 20000.0;
                (Vector3::new(cx + radius * phi.cos(), radius * phi.sin(), 0.3), 0.0)
            })
            .collect()
    };
    let around = dirac_phase(solenoid, &circle(0.0, 1.5), &k).unwrap();
    let want = k.e / (k.hbar * k.c) * flux;
    assert!((around - want).abs() < 1e-7 * want, "{around} vs {want}");
    let aside = dirac_phase(solenoid, &circle(3.0, 1.0), &k).unwrap();
    assert!(aside.abs() < 1e-7, "{aside}");
}

#[test]
fn monopole_charges() {
    let quad = SphereQuadrature::default();
    for (s, want) in [(0.5, -1.0), (-1.0, 2.0), (1.5, -3.0)] {
        let charge = SpinCharge::new(s).unwrap();
        let f = move |b: &Vector3<f64>| monopole_curvature(b, charge);
        for radius in [0.3, 2.0] {
            let q = chern_charge(&f, &Vector3::zeros(), radius, &quad, Execution::Sequential).unwrap();
            assert!((q - want).abs() < 1e-6, "S = {s}, radius {radius}: {q}");
        }
        let off = chern_charge(&f, &Vector3::new(2.0, 1.0, 0.0), 0.5, &quad, Execution::Sequential).unwrap();
        assert!(off.abs() < 1e-6);
    }
}

#[test]
fn monopole_is_closed_and_divergence_free_on_a_shell() {
    let s = SpinCharge(0.5);
    let f = |x: &[f64]| -> Result<DMatrix<f64>> {
        let v = monopole_curvature(&Vector3::new(x[0], x[1], x[2]), s)?;
        Ok(DMatrix::from_column_slice(3, 3, tensor_of(&v).as_slice()))
    };
    for x in [[0.5, 0.0, 0.0], [0.0, -1.2, 0.7], [1.1, 1.1, -1.1], [0.0, 0.0, 2.0]] {
        let r = maxwell_residuals(&f, &x, 1e-4).unwrap();
        assert!(r.max_cyclic() < 1e-6 && r.max_divergence() < 1e-6, "{x:?}");
    }
}

#[test]
fn regauge_leaves_curvature_alone() {
    let scn = random_zeeman(21);
    let m = at([0.1, 0.2, 0.0], [0.3, -0.1, 0.2], 0.4);
    let base = ModelConnectionField::anchored_at(&scn, &m).unwrap();
    let a = base.connection_at(&m).unwrap();

    let same = regauge(&a, |_: &PhasePoint| vec![0.0, 0.0], 1e-4).unwrap();
    for band in 0..2 {
        assert_eq!(same.band_components(band), a.adiabatic().band_components(band));
    }

    let slope = [0.3, -0.2, 0.1, 0.5, 0.0, -0.4, 1.1];
    let linear = move |p: &PhasePoint| {
        let s: f64 = p.coords().iter().zip(&slope).map(|(x, k)| x * k).sum();
        vec![s, -2.0 * s]
    };
    let shifted = regauge(&a, linear, 1e-4).unwrap();
    for (band, scale) in [(0, 1.0), (1, -2.0)] {
        for ((x, y), k) in shifted.band_components(band).iter().zip(a.adiabatic().band_components(band)).zip(slope) {
            assert!((x - (y - scale * k)).abs() < 1e-9);
        }
    }

    let quadratic = |p: &PhasePoint| {
        let c = p.coords();
        let q = 0.4 * c[3] * c[3] - 0.7 * c[3] * c[4] + 0.2 * c[5] * c[6] + 0.1 * c[0] * c[4];
        vec![q, 0.5 * q + c[1] * c[1]]
    };
    let moved = Regauged::new(&base, quadratic, 1e-4).unwrap();
    let f0 = curvature_from_connection(&base, &m, 1e-4).unwrap();
    let f1 = curvature_from_connection(&moved, &m, 1e-4).unwrap();
    assert!(f0.max_difference(&f1) < 1e-8, "{}", f0.max_difference(&f1));
}

#[test]
fn regauge_keeps_closed_loop_phase_modulo_two_pi() {
    let scn = ZeemanScenario::field_space(Constants::default()).unwrap();
    let path = latitude_loop(PI / 3.0, 4000);
    let base = ModelConnectionField::for_path(&scn, &path).unwrap();
    let phase = |p: &PhasePoint| {
        let r = p.r3();
        vec![r.x * r.y + 0.3 * r.z, (2.0 * r.x).sin()]
    };
    let moved = Regauged::new(&base, phase, 1e-5).unwrap();
    for band in 0..2 {
        let a = phase_line_integral(&base, &path, band).unwrap();
        let b = phase_line_integral(&moved, &path, band).unwrap();
        assert!(phase_distance(a.raw, b.raw) < 1e-8, "band {band}");
    }
}

proptest! {
    #[test]
    fn monopole_scales_inverse_square(x in -2.0f64..2.0, y in -2.0f64..2.0, z in 0.2f64..2.0, lambda in 0.1f64..10.0) {
        let h = Vector3::new(x, y, z);
        let s = SpinCharge(-0.5);
        let a = monopole_curvature(&(h * lambda), s).unwrap();
        let b = monopole_curvature(&h, s).unwrap() / (lambda * lambda);
        prop_assert!((a - b).norm() < 1e-12 * b.norm().max(1e-300));
    }

    #[test]
    fn plaquette_is_antisymmetric_and_band_odd(seed in 0u64..50, px in -0.5f64..0.5, rx in -0.5f64..0.5) {
        let scn = random_zeeman(seed);
        let m = at([px, 0.1, 0.0], [rx, 0.2, -0.1], 0.3);
        let f = adiabatic_curvature_numeric(&scn, &m, None).unwrap();
        for band in 0..2 {
            let t = f.band(band);
            prop_assert_eq!(t + t.transpose(), DMatrix::zeros(7, 7));
        }
        prop_assert!((f.band(0) + f.band(1)).amax() < 1e-6 * f.max_abs().max(1e-3));
    }

    #[test]
    fn pullback_scales_quadratically(f01 in -1.0f64..1.0, f02 in -1.0f64..1.0, f12 in -1.0f64..1.0) {
        let fb = DMatrix::from_row_slice(3, 3, &[0.0, f01, f02, -f01, 0.0, f12, -f02, -f12, 0.0]);
        let j = DMatrix::identity(3, 3) * 2.0;
        prop_assert!((pullback(&j, &fb) - &fb * 4.0).amax() < 1e-15);
        prop_assert_eq!(pullback(&DMatrix::identity(3, 3), &fb), fb);
    }
}
