use nalgebra::Vector3;
use sgk_core::dynamics::contour::momentum_monopole;
use sgk_core::dynamics::{displacement_contour, integrate, DeltaP, IntegratorConfig};
use sgk_core::scenarios::fields::LinearField;
use sgk_core::scenarios::optical::{IndexProfile, OpticalScenario};
use sgk_core::scenarios::{Field, RashbaScenario, ZeemanScenario};
use sgk_core::transport::{polarization_current, run_ensemble, EnsembleSpec, Sampler};
use sgk_core::{Constants, Error, Execution, PhasePoint};

fn rashba(hbar: f64, b: f64) -> RashbaScenario {
    let k = Constants { hbar, rho: 0.8, chi: 1.3, ..Constants::default() };
    RashbaScenario::new(Vector3::new(0.6, 0.0, 0.0), b, k).unwrap()
}

fn rashba_spec(count: usize, duration: f64) -> EnsembleSpec {
    EnsembleSpec {
        sampler: Sampler::Random {
            p_min: vec![0.3, 0.0],
            p_max: vec![0.9, 0.0],
            r_min: vec![-1.0, -1.0],
            r_max: vec![1.0, 1.0],
            count,
        },
        seed: 42,
        t0: 0.0,
        config: IntegratorConfig { duration, step: 0.01, delta_p: DeltaP::SpinTexture, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    }
}

#[test]
fn curvature_free_ensemble_has_no_spin_current() {
    let scn = ZeemanScenario::new(3, Field::uniform(Vector3::new(0.0, 0.0, 1.0)), Constants::default()).unwrap();
    let spec = EnsembleSpec {
        sampler: Sampler::Grid {
            p_min: vec![-0.5, -0.5, 0.0],
            p_max: vec![0.5, 0.5, 0.0],
            r_min: vec![0.0; 3],
            r_max: vec![0.0; 3],
            points_per_axis: 3,
        },
        seed: 1,
        t0: 0.0,
        config: IntegratorConfig { duration: 0.5, step: 0.01, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    };
    let rep = run_ensemble(&scn, None, &spec, Execution::Parallel).unwrap();
    assert_eq!(rep.total_samples, 9);
    assert!(rep.spin_current.abs() < 1e-12);
    assert!(rep.splitting.abs() < 1e-12);
}

#[test]
fn rashba_velocity_difference_is_twice_the_drift() {
    let scn = rashba(1e-5, 0.9);
    let spec = rashba_spec(16, 0.0);
    let rep = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Parallel).unwrap();
    let points = spec.sampler.points(2, 0.0, spec.seed).unwrap();
    for pair in &rep.samples {
        let m = points[pair[0].sample];
        let drift = scn.drift(&m, 1).unwrap().y;
        let dv = pair[1].initial_velocity - pair[0].initial_velocity;
        assert!((dv - 2.0 * drift).abs() < 1e-4 * drift.abs(), "{dv} vs {}", 2.0 * drift);
    }
    assert!(rep.spin_current < 0.0);
}

#[test]
fn flipping_b_flips_the_spin_current() {
    let spec = rashba_spec(8, 0.2);
    let up = rashba(1e-3, 0.9);
    let down = rashba(1e-3, -0.9);
    let a = run_ensemble(&up, Some(&up.em()), &spec, Execution::Parallel).unwrap();
    let b = run_ensemble(&down, Some(&down.em()), &spec, Execution::Parallel).unwrap();
    assert!(a.spin_current != 0.0);
    assert_eq!(a.spin_current.signum(), -b.spin_current.signum());
}

#[test]
fn reports_are_reproducible_across_execution_modes() {
    let scn = rashba(1e-3, 0.9);
    let spec = rashba_spec(12, 0.1);
    let a = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Parallel).unwrap();
    let b = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Sequential).unwrap();
    let c = run_ensemble(&scn, Some(&scn.em()), &spec, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = run_ensemble(&scn, Some(&scn.em()), &EnsembleSpec { seed: 43, ..spec }, Execution::Parallel).unwrap();
    assert_ne!(a.samples, other.samples);
}

#[test]
fn magnus_ensemble_splitting_matches_contour() {
    let (n0, alpha, k0) = (1.5, 0.4, 50.0);
    let scn = OpticalScenario::new(IndexProfile::Linear { n0, gradient: [0.0, alpha, 0.0] }, k0).unwrap();
    let config = IntegratorConfig { duration: 1.0, step: 1e-3, delta_p: DeltaP::SpinTexture, ..Default::default() };
    let spec = EnsembleSpec {
        sampler: Sampler::Grid {
            p_min: vec![n0, 0.0, 0.0],
            p_max: vec![n0, 0.0, 0.0],
            r_min: vec![-0.5, 0.0, -0.5],
            r_max: vec![0.5, 0.0, 0.5],
            points_per_axis: 2,
        },
        seed: 0,
        t0: 0.0,
        config,
        bands: [0, 2],
        transverse: Vector3::z(),
    };
    let rep = run_ensemble(&scn, None, &spec, Execution::Parallel).unwrap();
    let ray = integrate(&scn, 2, &PhasePoint::new(&[n0, 0.0, 0.0], &[0.0; 3], 0.0).unwrap(), &config, None).unwrap();
    let path: Vec<Vector3<f64>> = ray.states.iter().map(|s| s.m.p3()).collect();
    let oracle = 2.0 * displacement_contour(&path, momentum_monopole(1.0), 1.0 / k0).unwrap().z;
    let tol = 2.0 * rep.splitting_se + 1e-6 * oracle.abs();
    assert!((rep.splitting - oracle).abs() <= tol, "{} vs {oracle}", rep.splitting);
}

#[test]
fn polarization_current_weights_bands() {
    let scn = rashba(1e-3, 0.9);
    let rep = run_ensemble(&scn, Some(&scn.em()), &rashba_spec(4, 0.1), Execution::Parallel).unwrap();
    let (v0, v1) = (rep.bands[0].mean_velocity, rep.bands[1].mean_velocity);
    assert_eq!(polarization_current(&rep, [1.0, 0.0]).unwrap(), v0);
    let mixed = polarization_current(&rep, [0.6, 0.4]).unwrap();
    assert!((mixed - (0.5 * (v0 + v1) + 0.1 * (v0 - v1))).abs() < 1e-15);
    assert!(polarization_current(&rep, [0.7, 0.4]).is_err());
    assert!(polarization_current(&rep, [-0.1, 1.1]).is_err());

    // symmetric bands cancel at equal populations
    let free = ZeemanScenario::new(3, Field::uniform(Vector3::new(0.0, 0.0, 1.0)), Constants::default()).unwrap();
    let spec = EnsembleSpec {
        sampler: Sampler::Grid {
            p_min: vec![0.0, -0.5, 0.0],
            p_max: vec![0.0, 0.5, 0.0],
            r_min: vec![0.0; 3],
            r_max: vec![0.0; 3],
            points_per_axis: 2,
        },
        seed: 0,
        t0: 0.0,
        config: IntegratorConfig { duration: 0.1, step: 0.01, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    };
    let rep = run_ensemble(&free, None, &spec, Execution::Parallel).unwrap();
    assert!(polarization_current(&rep, [0.5, 0.5]).unwrap().abs() < 1e-12);
}

#[test]
fn failures_are_collected_and_thresholded() {
    // B(r) = r vanishes at the origin sample
    let scn = ZeemanScenario::new(3, Field::Linear(LinearField::identity()), Constants { hbar: 1e-3, ..Constants::default() }).unwrap();
    let spec = |points| EnsembleSpec {
        sampler: Sampler::Grid {
            p_min: vec![0.0; 3],
            p_max: vec![0.0; 3],
            r_min: vec![-1.0, 0.0, 0.0],
            r_max: vec![1.0, 0.0, 0.0],
            points_per_axis: points,
        },
        seed: 0,
        t0: 0.0,
        config: IntegratorConfig { duration: 0.01, step: 0.01, ..Default::default() },
        bands: [0, 1],
        transverse: Vector3::y(),
    };
    let rep = run_ensemble(&scn, None, &spec(11), Execution::Parallel).unwrap();
    assert_eq!(rep.samples.len(), 10);
    assert_eq!(rep.failures.len(), 2);
    assert_eq!(rep.failures[0].sample, 5);
    assert_eq!(rep.failures[0].kind, "DegeneracyError");
    assert!(matches!(
        run_ensemble(&scn, None, &spec(3), Execution::Parallel),
        Err(Error::EnsembleFailed { failed: 1, total: 3 })
    ));
}
