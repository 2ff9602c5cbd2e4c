//! Two-dimensional electron with Rashba coupling in an in-plane electric
//! field `E` and a normal magnetic field `B ẑ`:
//! `H = p²/2m* − eE·r + ħ σ·[χB ẑ + ρ(ẑ × p)]`.
//!
//! The electric force enters through the scalar potential in `H0`, so the
//! external field handed to the integrator carries only the magnetic part.

use nalgebra::Vector3;

use crate::dynamics::em::ExternalEMField;
use crate::error::{Error, Result};
use crate::phase_space::{Constants, PhasePoint};
use crate::spectral::{spin_matrix, CMatrix, HamiltonianModel, SpinRep, SplitForm};

#[derive(Debug, Clone)]
pub struct RashbaScenario {
    electric: Vector3<f64>,
    magnetic: f64,
    constants: Constants,
}

/// Velocities from the closed-form motion equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RashbaMotion {
    /// Exact solution of the coupled equations.
    pub p_dot: Vector3<f64>,
    pub r_dot: Vector3<f64>,
    /// Leading-order substitution `ṗ → eE` in the spin term.
    pub reduced_p_dot: Vector3<f64>,
    pub reduced_r_dot: Vector3<f64>,
    /// The anomalous term `ħF × eE` of the reduced velocity.
    pub drift: Vector3<f64>,
}

impl RashbaScenario {
    /// `electric` must lie in the plane (its z component is rejected).
    pub fn new(electric: Vector3<f64>, magnetic: f64, constants: Constants) -> Result<Self> {
        constants.validate()?;
        if electric.iter().any(|x| !x.is_finite()) || !magnetic.is_finite() {
            return Err(Error::InvalidInput("Rashba fields must be finite".into()));
        }
        if electric.z != 0.0 {
            return Err(Error::InvalidInput("Rashba electric field must be in-plane".into()));
        }
        Ok(RashbaScenario { electric, magnetic, constants })
    }

    pub fn electric(&self) -> Vector3<f64> {
        self.electric
    }

    pub fn magnetic(&self) -> f64 {
        self.magnetic
    }

    /// Field for the Lorentz force.
    pub fn em(&self) -> ExternalEMField {
        ExternalEMField::uniform(Vector3::zeros(), Vector3::new(0.0, 0.0, self.magnetic))
    }

    fn spin_of(band: usize) -> Result<f64> {
        match band {
            0 => Ok(-0.5),
            1 => Ok(0.5),
            _ => Err(Error::InvalidInput(format!("band {band} out of range"))),
        }
    }

    /// `F_{p1 p2} = −S ρ²χB/|H1|³`.
    pub fn curvature_pp(&self, m: &PhasePoint, band: usize) -> Result<f64> {
        let s = Self::spin_of(band)?;
        let n = self.h1_norm(m)?;
        let k = &self.constants;
        Ok(-s * k.rho * k.rho * k.chi * self.magnetic / n.powi(3))
    }

    fn h1_norm(&self, m: &PhasePoint) -> Result<f64> {
        let n = self.h1(m).norm();
        if !(n > 0.0) {
            return Err(Error::Singularity(format!("H1 = 0 at {m}")));
        }
        Ok(n)
    }

    /// Band velocity `∂E/∂p = p/m* + 2Sħρ²p/|H1|`.
    pub fn band_velocity(&self, m: &PhasePoint, band: usize) -> Result<Vector3<f64>> {
        let s = Self::spin_of(band)?;
        let n = self.h1_norm(m)?;
        let k = &self.constants;
        let p = m.p3();
        Ok(p / k.m_eff + p * (2.0 * s * k.hbar * k.rho * k.rho / n))
    }

    /// Reduced anomalous drift `ħF × eE`.
    pub fn drift(&self, m: &PhasePoint, band: usize) -> Result<Vector3<f64>> {
        let k = &self.constants;
        let f = self.curvature_pp(m, band)?;
        Ok(Vector3::z().cross(&self.electric) * (k.hbar * f * k.e))
    }
}

/// Full and reduced velocities at `m`.
///
/// With `F = F12 ẑ` and in-plane `ṙ` the coupled system
/// `ṗ = eE + (e/c)ṙ × B`, `ṙ = ∂E/∂p + ħF × ṗ` closes to
/// `ṙ (1 − ħF12 eB/c) = ∂E/∂p + ħF12 e ẑ × E`.
pub fn rashba_motion(scn: &RashbaScenario, m: &PhasePoint, band: usize) -> Result<RashbaMotion> {
    if m.dim() != 2 {
        return Err(Error::InvalidInput("Rashba motion is planar".into()));
    }
    let k = scn.constants;
    let f = scn.curvature_pp(m, band)?;
    let v = scn.band_velocity(m, band)?;
    let b = Vector3::new(0.0, 0.0, scn.magnetic);
    let e_force = scn.electric * k.e;
    let det = 1.0 - k.hbar * f * k.e * scn.magnetic / k.c;
    if !(det.abs() > 1e-10) {
        return Err(Error::SingularSystem { det });
    }
    let r_dot = (v + Vector3::z().cross(&e_force) * (k.hbar * f)) / det;
    let p_dot = e_force + r_dot.cross(&b) * (k.e / k.c);
    let drift = scn.drift(m, band)?;
    let free = m.p3() / k.m_eff;
    Ok(RashbaMotion {
        p_dot,
        r_dot,
        reduced_p_dot: e_force + free.cross(&b) * (k.e / k.c),
        reduced_r_dot: free + drift,
        drift,
    })
}

/// Component of an in-plane vector perpendicular to the momentum.
pub fn transverse_to(p: &Vector3<f64>, v: &Vector3<f64>) -> Result<f64> {
    let n = p.norm();
    if !(n > 0.0) {
        return Err(Error::Singularity("transverse direction undefined at p = 0".into()));
    }
    Ok(Vector3::z().cross(p).dot(v) / n)
}

impl HamiltonianModel for RashbaScenario {
    fn bands(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        2
    }
    fn constants(&self) -> &Constants {
        &self.constants
    }
    fn matrix(&self, m: &PhasePoint) -> CMatrix {
        spin_matrix(self.h0(m), self.constants.hbar, &self.h1(m), SpinRep::Pauli)
    }
    fn split_form(&self) -> Option<&dyn SplitForm> {
        Some(self)
    }
}

impl SplitForm for RashbaScenario {
    fn h0(&self, m: &PhasePoint) -> f64 {
        m.p3().norm_squared() / (2.0 * self.constants.m_eff) - self.constants.e * self.electric.dot(&m.r3())
    }
    fn h1(&self, m: &PhasePoint) -> Vector3<f64> {
        let p = m.p3();
        Vector3::new(0.0, 0.0, self.constants.chi * self.magnetic) + Vector3::z().cross(&p) * self.constants.rho
    }
    fn spin(&self) -> SpinRep {
        SpinRep::Pauli
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(hbar: f64) -> RashbaScenario {
        let k = Constants { hbar, rho: 0.8, chi: 1.3, ..Constants::default() };
        RashbaScenario::new(Vector3::new(0.7, 0.0, 0.0), 0.9, k).unwrap()
    }

    #[test]
    fn drift_is_odd_in_band_and_along_y() {
        let s = scenario(1.0);
        let m = PhasePoint::new(&[0.6, 0.0], &[0.0, 0.0], 0.0).unwrap();
        let (d0, d1) = (s.drift(&m, 0).unwrap(), s.drift(&m, 1).unwrap());
        assert_eq!(d0, -d1);
        // band 1: −ŷ ħeχρ²BE / (2|H1|³)
        let h1 = (1.3f64 * 0.9).hypot(0.8 * 0.6);
        let expected = -1.3 * 0.64 * 0.9 * 0.7 / (2.0 * h1.powi(3));
        assert!((d1.y - expected).abs() < 1e-15);
        assert_eq!(d1.x, 0.0);
    }

    #[test]
    fn no_fields_is_free_motion() {
        let k = Constants { rho: 1e-12, ..Constants::default() };
        let s = RashbaScenario::new(Vector3::zeros(), 0.0, k).unwrap();
        let m = PhasePoint::new(&[0.3, -0.4], &[1.0, 2.0], 0.0).unwrap();
        let mo = rashba_motion(&s, &m, 0).unwrap();
        assert!((mo.r_dot - Vector3::new(0.3, -0.4, 0.0)).norm() < 1e-11);
        assert!(mo.p_dot.norm() < 1e-15);
    }
}
