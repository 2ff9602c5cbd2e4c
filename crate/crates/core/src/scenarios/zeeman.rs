//! Spin-1/2 particle in an inhomogeneous, nonstationary magnetic field:
//! `H = p²/2m* + ħχ σ·B(r, t)`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gauge::curvature::CurvatureTensor;
use crate::phase_space::{Constants, PhasePoint};
use crate::scenarios::fields::{Field, LinearField, VectorField};
use crate::spectral::{spin_matrix, CMatrix, CVector, HamiltonianModel, SpinRep, SplitForm};

/// Which coordinate patch an analytic Zeeman eigenvector is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Patch {
    /// The closed form with denominators `√(B ± B_z)` as written for each branch.
    Standard,
    /// The same state multiplied by a phase, regular on the other pole.
    Rotated,
}

/// Patch switch: the standard form is used where `±B_z > −0.9 B`.
pub const PATCH_SWITCH: f64 = 0.9;

fn check_field(b: &Vector3<f64>) -> Result<f64> {
    let n = b.norm();
    if !(n > 0.0) {
        return Err(Error::Singularity("B = 0 is the degeneracy point".into()));
    }
    Ok(n)
}

/// Eigenvector of `σ·B̂` with eigenvalue `+1` (`up = true`) or `−1`, and its
/// adiabatic potential in field space, in the requested patch.
pub fn branch_state(b: &Vector3<f64>, up: bool, patch: Patch) -> Result<(CVector, Vector3<f64>)> {
    let bn = check_field(b)?;
    let w = Complex64::new(b.x, b.y);
    let norm = (2.0 * bn).sqrt();
    // The denominator that vanishes on this patch's singular ray.
    let d = match (up, patch) {
        (true, Patch::Standard) | (false, Patch::Rotated) => bn + b.z,
        (false, Patch::Standard) | (true, Patch::Rotated) => bn - b.z,
    };
    if d <= 0.0 {
        return Err(Error::GaugePatch(format!(
            "B = ({}, {}, {}) lies on the singular ray of this patch",
            b.x, b.y, b.z
        )));
    }
    let s = d.sqrt();
    let (u0, u1) = match (up, patch) {
        (true, Patch::Standard) => (Complex64::from(s), w / s),
        (true, Patch::Rotated) => (w.conj() / s, Complex64::from(s)),
        (false, Patch::Standard) => (Complex64::from(s), -w / s),
        (false, Patch::Rotated) => (-w.conj() / s, Complex64::from(s)),
    };
    let sign = match patch {
        Patch::Standard => 1.0,
        Patch::Rotated => -1.0,
    };
    let a = Vector3::new(b.y, -b.x, 0.0) * (sign / (2.0 * bn * d));
    Ok((CVector::from_vec(vec![u0 / norm, u1 / norm]), a))
}

/// Patch used by [`zeeman_analytic`] for a branch at `b`.
pub fn default_patch(b: &Vector3<f64>, up: bool) -> Patch {
    let bn = b.norm();
    let z = if up { b.z } else { -b.z };
    if z > -PATCH_SWITCH * bn {
        Patch::Standard
    } else {
        Patch::Rotated
    }
}

/// The diagonalizing unitary in the closed form, columns ordered
/// `(σ·B̂ = +1, σ·B̂ = −1)`.
pub fn closed_form_unitary(b: &Vector3<f64>) -> Result<CMatrix> {
    let (up, _) = branch_state(b, true, Patch::Standard)?;
    let (down, _) = branch_state(b, false, Patch::Standard)?;
    let mut u = CMatrix::zeros(2, 2);
    u.set_column(0, &up);
    u.set_column(1, &down);
    Ok(u)
}

/// Field-space monopole pseudovector `∓B/2B³` for the `σ·B̂ = ±1` state.
pub fn field_space_curvature(b: &Vector3<f64>, up: bool) -> Result<Vector3<f64>> {
    let bn = check_field(b)?;
    let sign = if up { -1.0 } else { 1.0 };
    Ok(b * (sign / (2.0 * bn.powi(3))))
}

#[derive(Debug, Clone)]
pub struct ZeemanScenario {
    dim: usize,
    field: Field,
    constants: Constants,
}

/// Closed-form spectral and gauge data at one point, indexed by band
/// (ascending energy).
#[derive(Debug, Clone)]
pub struct ZeemanAnalytic {
    pub energies: Vec<f64>,
    /// Columns are the band eigenvectors in the patched closed form.
    pub unitary: CMatrix,
    pub patches: Vec<Patch>,
    /// Adiabatic potential in field space.
    pub field_potential: Vec<Vector3<f64>>,
    /// Adiabatic potential over the phase-space axes.
    pub potential: Vec<Vec<f64>>,
    /// Field-space curvature pseudovector.
    pub field_curvature: Vec<Vector3<f64>>,
    pub curvature: CurvatureTensor,
}

impl ZeemanScenario {
    pub fn new(dim: usize, field: Field, constants: Constants) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        constants.validate()?;
        field.validate()?;
        if constants.chi == 0.0 {
            return Err(Error::InvalidInput("chi must be nonzero".into()));
        }
        Ok(ZeemanScenario { dim, field, constants })
    }

    /// The model written directly in field space: `r` plays the role of `B`.
    pub fn field_space(constants: Constants) -> Result<Self> {
        Self::new(3, Field::Linear(LinearField::identity()), constants)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn b_at(&self, m: &PhasePoint) -> Vector3<f64> {
        self.field.value(&m.r3(), m.t())
    }

    /// Band holding the `σ·B̂ = +1` state (energy `+ħχB`).
    pub fn up_band(&self) -> usize {
        if self.constants.chi > 0.0 {
            1
        } else {
            0
        }
    }

    /// `∂B/∂m_k` for every phase-space axis.
    pub fn field_derivatives(&self, m: &PhasePoint) -> Vec<Vector3<f64>> {
        let d = self.dim;
        let j: Matrix3<f64> = self.field.jacobian(&m.r3(), m.t());
        let mut out = vec![Vector3::zeros(); d];
        out.extend((0..d).map(|i| j.column(i).into_owned()));
        out.push(self.field.rate(&m.r3(), m.t()));
        out
    }

    pub fn analytic(&self, m: &PhasePoint) -> Result<ZeemanAnalytic> {
        let b = self.b_at(m);
        let bn = check_field(&b)?;
        let h0 = self.h0(m);
        let split = self.constants.hbar * self.constants.chi.abs() * bn;
        let energies = vec![h0 - split, h0 + split];
        let grads = self.field_derivatives(m);
        let up_band = self.up_band();
        let mut unitary = CMatrix::zeros(2, 2);
        let mut patches = Vec::new();
        let mut field_potential = Vec::new();
        let mut potential = Vec::new();
        let mut field_curvature = Vec::new();
        let mut curvature = CurvatureTensor::zeros(self.dim, 2);
        for band in 0..2 {
            let up = band == up_band;
            let patch = default_patch(&b, up);
            let (u, a) = branch_state(&b, up, patch)?;
            unitary.set_column(band, &u);
            patches.push(patch);
            potential.push(grads.iter().map(|g| a.dot(g)).collect());
            field_potential.push(a);
            field_curvature.push(field_space_curvature(&b, up)?);
            let sign = if up { -0.5 } else { 0.5 };
            let unit = b / bn.powi(3);
            for i in 0..grads.len() {
                for j in (i + 1)..grads.len() {
                    curvature.set(band, i, j, sign * unit.dot(&grads[i].cross(&grads[j])));
                }
            }
        }
        Ok(ZeemanAnalytic {
            energies,
            unitary,
            patches,
            field_potential,
            potential,
            field_curvature,
            curvature,
        })
    }
}

impl HamiltonianModel for ZeemanScenario {
    fn bands(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        self.dim
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

impl SplitForm for ZeemanScenario {
    fn h0(&self, m: &PhasePoint) -> f64 {
        m.p3().norm_squared() / (2.0 * self.constants.m_eff)
    }
    fn h1(&self, m: &PhasePoint) -> Vector3<f64> {
        self.b_at(m) * self.constants.chi
    }
    fn spin(&self) -> SpinRep {
        SpinRep::Pauli
    }
}
