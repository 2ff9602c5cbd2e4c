//! Polarized rays in a smoothly inhomogeneous isotropic medium. The inverse
//! wavenumber `1/k0` takes the place of `ħ` and the helicity `±1` the place
//! of the spin projection.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{Constants, PhasePoint};
use crate::spectral::{spin_matrix, CMatrix, HamiltonianModel, SpinRep, SplitForm};

/// Refractive index profile given through `n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexProfile {
    Homogeneous { n0: f64 },
    /// `n² = n0² − 2 g·r`.
    Linear { n0: f64, gradient: [f64; 3] },
}

impl IndexProfile {
    pub fn n_squared(&self, r: &Vector3<f64>) -> f64 {
        match self {
            IndexProfile::Homogeneous { n0 } => n0 * n0,
            IndexProfile::Linear { n0, gradient } => n0 * n0 - 2.0 * Vector3::from(*gradient).dot(r),
        }
    }

    /// `∇n²`.
    pub fn grad_n_squared(&self, _r: &Vector3<f64>) -> Vector3<f64> {
        match self {
            IndexProfile::Homogeneous { .. } => Vector3::zeros(),
            IndexProfile::Linear { gradient, .. } => Vector3::from(*gradient) * -2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            IndexProfile::Homogeneous { n0 } => *n0 > 0.0 && n0.is_finite(),
            IndexProfile::Linear { n0, gradient } => {
                *n0 > 0.0 && n0.is_finite() && gradient.iter().all(|g| g.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("refractive index must be positive and finite".into()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpticalScenario {
    index: IndexProfile,
    constants: Constants,
}

impl OpticalScenario {
    pub fn new(index: IndexProfile, k0: f64) -> Result<Self> {
        index.validate()?;
        let constants = Constants {
            hbar: 1.0 / k0,
            k0,
            ..Constants::default()
        };
        constants.validate()?;
        Ok(OpticalScenario { index, constants })
    }

    pub fn index(&self) -> &IndexProfile {
        &self.index
    }

    pub fn k0(&self) -> f64 {
        self.constants.k0
    }

    /// Band index of helicity `±1` in the three-band helicity model.
    pub fn helicity_band(helicity: i32) -> Result<usize> {
        match helicity {
            -1 => Ok(0),
            1 => Ok(2),
            h => Err(Error::InvalidInput(format!("helicity must be +1 or -1, got {h}"))),
        }
    }
}

/// `H = ½(p² − n²) + k0⁻¹ S·p` with spin-1 matrices.
impl HamiltonianModel for OpticalScenario {
    fn bands(&self) -> usize {
        3
    }
    fn dim(&self) -> usize {
        3
    }
    fn constants(&self) -> &Constants {
        &self.constants
    }
    fn matrix(&self, m: &PhasePoint) -> CMatrix {
        spin_matrix(self.h0(m), self.constants.hbar, &self.h1(m), SpinRep::SpinOne)
    }
    fn split_form(&self) -> Option<&dyn SplitForm> {
        Some(self)
    }
}

impl SplitForm for OpticalScenario {
    fn h0(&self, m: &PhasePoint) -> f64 {
        0.5 * (m.p3().norm_squared() - self.index.n_squared(&m.r3()))
    }
    fn h1(&self, m: &PhasePoint) -> Vector3<f64> {
        m.p3()
    }
    fn spin(&self) -> SpinRep {
        SpinRep::SpinOne
    }
}

/// A ray sampled at uniform parameter steps.
#[derive(Debug, Clone)]
pub struct Ray {
    pub helicity: i32,
    pub tau: Vec<f64>,
    pub r: Vec<Vector3<f64>>,
    pub p: Vec<Vector3<f64>>,
    /// Largest `|p² − n²(r)|` along the ray.
    pub constraint_drift: f64,
    /// Set when the drift exceeded `1e-6`.
    pub constraint_warning: bool,
}

impl Ray {
    pub fn final_r(&self) -> Vector3<f64> {
        *self.r.last().expect("ray has samples")
    }
}

pub const CONSTRAINT_WARN: f64 = 1e-6;

/// Integrate `ṗ = ½∇n²`, `ṙ = p − σ k0⁻¹ (p/p³ × ṗ)` with classical RK4 over
/// the ray parameter. The launch momentum is `n(r0)·direction/|direction|`.
pub fn magnus_ray(
    scn: &OpticalScenario,
    r0: Vector3<f64>,
    direction: Vector3<f64>,
    helicity: i32,
    length: f64,
    step: f64,
) -> Result<Ray> {
    OpticalScenario::helicity_band(helicity)?;
    if !(step > 0.0) || !(length >= 0.0) || !step.is_finite() || !length.is_finite() {
        return Err(Error::InvalidInput("ray length must be >= 0 and step > 0".into()));
    }
    let dn = direction.norm();
    if !(dn > 0.0) {
        return Err(Error::Singularity("launch direction has zero length".into()));
    }
    let n2 = scn.index.n_squared(&r0);
    if !(n2 > 0.0) {
        return Err(Error::InvalidInput(format!("n² = {n2} at the launch point")));
    }
    let sigma = helicity as f64;
    let inv_k0 = 1.0 / scn.k0();
    let index = scn.index;
    let rhs = |r: &Vector3<f64>, p: &Vector3<f64>| -> Result<(Vector3<f64>, Vector3<f64>)> {
        let pn = p.norm();
        if !(pn > 0.0) {
            return Err(Error::Singularity("p = 0 on the ray".into()));
        }
        let pd = index.grad_n_squared(r) * 0.5;
        let rd = p - p.cross(&pd) * (sigma * inv_k0 / pn.powi(3));
        Ok((pd, rd))
    };
    let steps = (length / step).round() as usize;
    let h = if steps == 0 { 0.0 } else { length / steps as f64 };
    let mut r = r0;
    let mut p = direction * (n2.sqrt() / dn);
    let mut ray = Ray {
        helicity,
        tau: vec![0.0],
        r: vec![r],
        p: vec![p],
        constraint_drift: 0.0,
        constraint_warning: false,
    };
    for k in 0..steps {
        let (k1p, k1r) = rhs(&r, &p)?;
        let (k2p, k2r) = rhs(&(r + k1r * (0.5 * h)), &(p + k1p * (0.5 * h)))?;
        let (k3p, k3r) = rhs(&(r + k2r * (0.5 * h)), &(p + k2p * (0.5 * h)))?;
        let (k4p, k4r) = rhs(&(r + k3r * h), &(p + k3p * h))?;
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
        let n2 = index.n_squared(&r);
        if !(n2 > 0.0) {
            return Err(Error::InvalidInput(format!("ray left the medium (n² = {n2})")));
        }
        ray.constraint_drift = ray.constraint_drift.max((p.norm_squared() - n2).abs());
        ray.tau.push((k + 1) as f64 * h);
        ray.r.push(r);
        ray.p.push(p);
    }
    ray.constraint_warning = ray.constraint_drift > CONSTRAINT_WARN;
    Ok(ray)
}
