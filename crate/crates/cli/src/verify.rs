//! Built-in self-checks against closed forms, sized to run in a few seconds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};

use sgk_core::dynamics::contour::momentum_monopole;
use sgk_core::dynamics::{adiabaticity_epsilon, displacement_contour, integrate, DeltaP, IntegratorConfig};
use sgk_core::gauge::curvature::{tensor_of, Block};
use sgk_core::gauge::phase::{phase_distance, ModelConnectionField};
use sgk_core::gauge::topology::{max_maxwell_residuals, sphere_flux};
use sgk_core::gauge::{
    adiabatic_curvature_numeric, curvature_from_connection, monopole_curvature, nonabelian_curvature,
    phase_line_integral, ConnectionField, Regauged, SphereQuadrature,
};
use sgk_core::scenarios::fields::LinearField;
use sgk_core::scenarios::{Field, IndexProfile, OpticalScenario, RashbaScenario, SmoothRandomField, SpinOrbitScenario, ZeemanScenario};
use sgk_core::spectral::SpinCharge;
use sgk_core::transport::{run_ensemble, EnsembleSpec, Sampler};
use sgk_core::{Constants, Execution, PhasePoint, Result};

use crate::output::Record;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    /// Worst observed deviation; `NaN` when the check errored.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

impl Check {
    fn from(name: &'static str, r: Result<(f64, f64)>) -> Check {
        match r {
            Ok((value, tolerance)) => Check { name, value, tolerance, passed: value <= tolerance, error: None },
            Err(e) => Check { name, value: f64::NAN, tolerance: f64::NAN, passed: false, error: Some(e.to_string()) },
        }
    }

    pub fn record(&self) -> String {
        let mut r = Record::new("check")
            .str("name", self.name)
            .bool("passed", self.passed)
            .num("value", self.value)
            .num("tolerance", self.tolerance);
        if let Some(e) = &self.error {
            r = r.str("error", e);
        }
        r.finish()
    }
}

fn random_zeeman(seed: u64) -> Result<ZeemanScenario> {
    let field = SmoothRandomField::sample(seed, Vector3::new(0.3, -0.2, 2.0), 3, 0.4, 1.0, 0.5);
    ZeemanScenario::new(3, Field::Modes(field), Constants::default())
}

fn lcg_points(seed: u64, n: usize) -> Vec<PhasePoint> {
    // fixed low-discrepancy offsets; the seed only shifts them
    let s = (seed % 1000) as f64 * 1e-3;
    (0..n)
        .map(|i| {
            let f = |k: f64| ((i as f64 + 1.0) * k + s).fract() - 0.5;
            PhasePoint::new(
                &[f(0.754_877_666), f(0.569_840_291), f(0.430_159_709)],
                &[f(0.618_033_989), f(0.414_213_562), f(0.732_050_808)],
                f(0.236_067_977),
            )
            .expect("finite point")
        })
        .collect()
}

fn flatness(seed: u64, exec: Execution) -> Result<(f64, f64)> {
    let scn = random_zeeman(seed)?;
    let base = PhasePoint::new(&[0.1, 0.2, -0.1], &[0.0; 3], 0.3)?;
    let worst = exec.map(27, |i| {
        let r = [(i / 9) as f64 - 1.0, ((i / 3) % 3) as f64 - 1.0, (i % 3) as f64 - 1.0].map(|x| 0.4 * x);
        nonabelian_curvature(&scn, &base.with_r(&r), 1e-4, true).map(|f| f.max_norm())
    });
    let worst = worst.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok((worst.into_iter().fold(0.0, f64::max), 1e-6))
}

fn oracle(seed: u64, exec: Execution) -> Result<(f64, f64)> {
    let zee = random_zeeman(seed)?;
    let so = SpinOrbitScenario::new(
        3,
        Field::Modes(SmoothRandomField::sample(seed + 1, Vector3::new(0.0, 0.0, 1.5), 2, 0.3, 1.0, 0.5)),
        Field::Modes(SmoothRandomField::sample(seed + 2, Vector3::new(0.8, 0.2, 0.0), 2, 0.2, 1.0, 0.5)),
        Constants::default(),
    )?;
    let pts = lcg_points(seed, 20);
    let errs = exec.map(pts.len(), |i| -> Result<f64> {
        let m = pts[i];
        let a = zee.analytic(&m)?.curvature.relative_difference(&adiabatic_curvature_numeric(&zee, &m, None)?);
        let b = so.analytic(&m)?.relative_difference(&adiabatic_curvature_numeric(&so, &m, None)?);
        Ok(a.max(b))
    });
    let worst = errs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok((worst.into_iter().fold(0.0, f64::max), 1e-5))
}

fn quantization(exec: Execution) -> Result<(f64, f64)> {
    let quad = SphereQuadrature::default();
    let mut worst = 0.0f64;
    for s in [-1.0, -0.5, 0.5, 1.0] {
        let charge = SpinCharge::new(s)?;
        let field = |x: &Vector3<f64>| monopole_curvature(x, charge);
        for radius in [0.5, 1.0] {
            let q = sphere_flux(&field, &Vector3::zeros(), radius, &quad, exec)?;
            worst = worst.max((q + 2.0 * s).abs());
        }
    }
    Ok((worst, 1e-6))
}

fn loop_path(theta: f64, n: usize) -> Vec<PhasePoint> {
    (0..=n)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let b = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            PhasePoint::new(&[0.0; 3], &b, 0.0).expect("finite point")
        })
        .collect()
}

fn solid_angle() -> Result<(f64, f64)> {
    let scn = ZeemanScenario::field_space(Constants::default())?;
    let mut worst = 0.0f64;
    for theta in [PI / 6.0, PI / 3.0, PI / 2.0] {
        let path = loop_path(theta, 40_000);
        let field = ModelConnectionField::for_path(&scn, &path)?;
        for band in 0..2 {
            let sign = if band == scn.up_band() { -1.0 } else { 1.0 };
            let line = phase_line_integral(&field, &path, band)?;
            worst = worst.max(phase_distance(line.raw, sign * PI * (1.0 - theta.cos())));
        }
    }
    Ok((worst, 1e-6))
}

fn gauge_invariance(seed: u64) -> Result<(f64, f64)> {
    let scn = random_zeeman(seed)?;
    let m = PhasePoint::new(&[0.2, -0.1, 0.3], &[0.1, 0.2, -0.3], 0.4)?;
    let field = ModelConnectionField::anchored_at(&scn, &m)?;
    let phase = |x: &PhasePoint| {
        let c = x.coords();
        vec![(0.7 * c[3] + 0.3 * c[6]).sin() + c[0] * c[4], (1.1 * c[5] - 0.4 * c[1]).cos()]
    };
    let regauged = Regauged::new(&field, phase, 1e-3)?;
    let f0 = curvature_from_connection(&field, &m, 1e-3)?;
    let f1 = curvature_from_connection(&regauged, &m, 1e-3)?;
    let mut worst = f0.max_difference(&f1);
    let path: Vec<PhasePoint> = (0..=200)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 200.0;
            m.with_r(&[0.1 + 0.2 * a.cos(), 0.2 + 0.2 * a.sin(), -0.3])
        })
        .collect();
    let loop_field = ModelConnectionField::for_path(&scn, &path)?;
    let shifted = Regauged::new(&loop_field, phase, 1e-3)?;
    for band in 0..loop_field.bands() {
        let a = phase_line_integral(&loop_field, &path, band)?;
        let b = phase_line_integral(&shifted, &path, band)?;
        worst = worst.max(phase_distance(a.raw, b.raw));
    }
    Ok((worst, 1e-8))
}

fn null_cases() -> Result<(f64, f64)> {
    let ramp = ZeemanScenario::new(
        3,
        Field::Linear(LinearField::ramp(Vector3::new(1.0, 0.5, 0.2), Vector3::new(0.3, -0.2, 0.1))),
        Constants::default(),
    )?;
    let so = SpinOrbitScenario::new(
        3,
        Field::uniform(Vector3::new(0.0, 0.0, 1.0)),
        Field::uniform(Vector3::new(1.0, 0.0, 0.0)),
        Constants::default(),
    )?;
    let mut worst = 0.0f64;
    for m in lcg_points(7, 5) {
        worst = worst.max(adiabatic_curvature_numeric(&ramp, &m, None)?.max_abs());
        let m = m.with_p(&[0.4, m.p()[1], m.p()[2]]);
        let f = adiabatic_curvature_numeric(&so, &m, None)?;
        for b in 0..2 {
            worst = worst.max(f.block(b, Block::PP).amax());
        }
    }
    Ok((worst, 1e-10))
}

fn rashba_drift() -> Result<(f64, f64)> {
    let scn = |hbar: f64| {
        let k = Constants { hbar, rho: 0.8, chi: 1.3, ..Constants::default() };
        RashbaScenario::new(Vector3::new(0.6, 0.0, 0.0), 0.9, k)
    };
    let small = scn(1e-5)?;
    let cfg = IntegratorConfig { duration: 0.0, delta_p: DeltaP::SpinTexture, ..Default::default() };
    let mut worst = 0.0f64;
    for px in [0.3, 0.5, 0.8] {
        let m = PhasePoint::new(&[px, 0.0], &[0.0, 0.0], 0.0)?;
        let mut drifts = [0.0; 2];
        for (band, slot) in drifts.iter_mut().enumerate() {
            let traj = integrate(&small, band, &m, &cfg, Some(&small.em()))?;
            let vy = traj.states[0].r_dot[1];
            let d = small.drift(&m, band)?.y;
            worst = worst.max((vy - d).abs() / d.abs());
            *slot = d;
        }
        if drifts[0] != -drifts[1] {
            worst = f64::INFINITY;
        }
    }
    let gap = |hbar: f64| -> Result<f64> {
        let s = scn(hbar)?;
        let m = PhasePoint::new(&[0.4, 0.3], &[0.0, 0.0], 0.0)?;
        let c = sgk_core::scenarios::rashba_motion(&s, &m, 1)?;
        let t = sgk_core::scenarios::rashba::transverse_to;
        Ok((t(&m.p3(), &c.r_dot)? - t(&m.p3(), &c.reduced_r_dot)?).abs())
    };
    let ratio = gap(0.02)? / gap(0.01)?;
    // map the ratio check onto the same scale as the drift tolerance
    worst = worst.max((ratio - 4.0).abs() * 1e-4 / 0.05);
    Ok((worst, 1e-4))
}

fn magnus() -> Result<(f64, f64)> {
    let (n0, alpha, k0) = (1.5, 0.4, 50.0);
    let cfg = IntegratorConfig { duration: 1.0, step: 2e-3, delta_p: DeltaP::SpinTexture, ..Default::default() };
    let m0 = PhasePoint::new(&[n0, 0.0, 0.0], &[0.0; 3], 0.0)?;
    let split = |scn: &OpticalScenario| -> Result<(f64, Vec<Vector3<f64>>)> {
        let minus = integrate(scn, 0, &m0, &cfg, None)?;
        let plus = integrate(scn, 2, &m0, &cfg, None)?;
        let path = plus.states.iter().map(|s| s.m.p3()).collect();
        Ok((plus.last().m.r()[2] - minus.last().m.r()[2], path))
    };
    let linear = OpticalScenario::new(IndexProfile::Linear { n0, gradient: [0.0, alpha, 0.0] }, k0)?;
    let (s, path) = split(&linear)?;
    let oracle = 2.0 * displacement_contour(&path, momentum_monopole(1.0), 1.0 / k0)?.z;
    let mut worst = (s - oracle).abs() / oracle.abs();
    let ray = sgk_core::scenarios::magnus_ray(&linear, Vector3::zeros(), Vector3::x(), 1, 1.0, 1e-3)?;
    worst = worst.max(ray.constraint_drift * 1e-4 / 1e-6);
    let flat = OpticalScenario::new(IndexProfile::Homogeneous { n0 }, k0)?;
    worst = worst.max(split(&flat)?.0.abs());
    Ok((worst, 1e-4))
}

fn maxwell(exec: Execution) -> Result<(f64, f64)> {
    let field = |x: &[f64]| -> Result<DMatrix<f64>> {
        let f = monopole_curvature(&Vector3::new(x[0], x[1], x[2]), SpinCharge(0.5))?;
        let t = tensor_of(&f);
        Ok(DMatrix::from_fn(3, 3, |i, j| t[(i, j)]))
    };
    let points: Vec<Vec<f64>> = lcg_points(3, 24)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let dir = Vector3::from_column_slice(p.r()).normalize();
            let radius = 0.5 + 1.5 * i as f64 / 23.0;
            (dir * radius).as_slice().to_vec()
        })
        .collect();
    let (div, cyc) = max_maxwell_residuals(&field, &points, 1e-4, exec)?;
    Ok((div.max(cyc), 1e-6))
}

fn epsilon_ramp() -> Result<(f64, f64)> {
    let (b0, beta, chi) = (2.0, 0.05, 0.7);
    let scn = ZeemanScenario::new(
        3,
        Field::Linear(LinearField::ramp(Vector3::new(0.0, 0.0, b0), Vector3::new(0.0, 0.0, beta))),
        Constants { chi, ..Constants::default() },
    )?;
    let mut worst = 0.0f64;
    for t in [0.0, 1.0, 3.0] {
        let m = PhasePoint::new(&[0.0; 3], &[0.0; 3], t)?;
        let b = b0 + beta * t;
        let e = adiabaticity_epsilon(&scn, 0, &m, &[0.0; 6], &DeltaP::Gap)?;
        worst = worst.max((e.value - beta / (4.0 * chi * b * b)).abs());
    }
    Ok((worst, 1e-8))
}

fn determinism(seed: u64) -> Result<(f64, f64)> {
    let k = Constants { hbar: 1e-3, rho: 0.8, chi: 1.3, ..Constants::default() };
    let scn = RashbaScenario::new(Vector3::new(0.6, 0.0, 0.0), 0.9, k)?;
    let spec = EnsembleSpec {
        sampler: Sampler::Random {
            p_min: vec![0.3, -0.2],
            p_max: vec![0.9, 0.2],
            r_min: vec![-1.0, -1.0],
            r_max: vec![1.0, 1.0],
            count: 8,
        },
        seed,
        t0: 0.0,
        config: IntegratorConfig { duration: 0.05, step: 0.01, delta_p: DeltaP::SpinTexture, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    };
    let a = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Parallel)?;
    let b = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Sequential)?;
    Ok((if a == b { 0.0 } else { 1.0 }, 0.0))
}

/// Run every check; failures are reported, never raised.
pub fn run_checks(seed: u64, exec: Execution) -> Vec<Check> {
    vec![
        Check::from("exact_flatness", flatness(seed, exec)),
        Check::from("plaquette_vs_split_form", oracle(seed, exec)),
        Check::from("monopole_quantization", quantization(exec)),
        Check::from("solid_angle_phase", solid_angle()),
        Check::from("gauge_invariance", gauge_invariance(seed)),
        Check::from("null_curvature", null_cases()),
        Check::from("rashba_drift", rashba_drift()),
        Check::from("optical_magnus", magnus()),
        Check::from("maxwell_residuals", maxwell(exec)),
        Check::from("epsilon_ramp", epsilon_ramp()),
        Check::from("ensemble_determinism", determinism(seed)),
    ]
}
