//! Relativistic spin-orbit coupling in external fields:
//! `H = p²/2m* + ħ σ·[χB + ρ(E × p)]`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::gauge::curvature::CurvatureTensor;
use crate::phase_space::{Constants, PhasePoint};
use crate::scenarios::fields::{Field, VectorField};
use crate::spectral::{spin_matrix, CMatrix, HamiltonianModel, SpinRep, SplitForm};

#[derive(Debug, Clone)]
pub struct SpinOrbitScenario {
    dim: usize,
    magnetic: Field,
    electric: Field,
    constants: Constants,
}

impl SpinOrbitScenario {
    pub fn new(dim: usize, magnetic: Field, electric: Field, constants: Constants) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {dim}")));
        }
        constants.validate()?;
        magnetic.validate()?;
        electric.validate()?;
        Ok(SpinOrbitScenario {
            dim,
            magnetic,
            electric,
            constants,
        })
    }

    pub fn magnetic(&self) -> &Field {
        &self.magnetic
    }

    pub fn electric(&self) -> &Field {
        &self.electric
    }

    /// `∂H1/∂m_k` for every axis, from the analytic field derivatives.
    pub fn h1_derivatives(&self, m: &PhasePoint) -> Vec<Vector3<f64>> {
        let (chi, rho) = (self.constants.chi, self.constants.rho);
        let (r, t, p) = (m.r3(), m.t(), m.p3());
        let e = self.electric.value(&r, t);
        let jb = self.magnetic.jacobian(&r, t);
        let je = self.electric.jacobian(&r, t);
        let d = self.dim;
        let mut out: Vec<Vector3<f64>> = (0..d).map(|i| e.cross(&Vector3::ith(i, 1.0)) * rho).collect();
        out.extend((0..d).map(|i| jb.column(i) * chi + je.column(i).into_owned().cross(&p) * rho));
        out.push(self.magnetic.rate(&r, t) * chi + self.electric.rate(&r, t).cross(&p) * rho);
        out
    }

    /// All five curvature blocks in closed form: each entry is
    /// `−S·H1·(∂_i H1 × ∂_j H1)/|H1|³` with the derivatives written out.
    pub fn analytic(&self, m: &PhasePoint) -> Result<CurvatureTensor> {
        let h1 = self.h1(m);
        let n = h1.norm();
        if !(n > 0.0) {
            return Err(Error::Singularity(format!("H1 = 0 at {m}")));
        }
        let g = self.h1_derivatives(m);
        let unit = h1 / n.powi(3);
        let mut out = CurvatureTensor::zeros(self.dim, 2);
        for i in 0..g.len() {
            for j in (i + 1)..g.len() {
                let base = unit.dot(&g[i].cross(&g[j]));
                out.set(0, i, j, 0.5 * base);
                out.set(1, i, j, -0.5 * base);
            }
        }
        Ok(out)
    }

    /// Momentum-space pseudovector `−S χρ²(B·E)E/|H1|³`, valid at any point.
    pub fn pp_pseudovector(&self, m: &PhasePoint, band: usize) -> Result<Vector3<f64>> {
        let h1 = self.h1(m);
        let n = h1.norm();
        if !(n > 0.0) {
            return Err(Error::Singularity(format!("H1 = 0 at {m}")));
        }
        let s = if band == 0 { -0.5 } else { 0.5 };
        let b = self.magnetic.value(&m.r3(), m.t());
        let e = self.electric.value(&m.r3(), m.t());
        let (chi, rho) = (self.constants.chi, self.constants.rho);
        Ok(e * (-s * chi * rho * rho * b.dot(&e) / n.powi(3)))
    }
}

impl HamiltonianModel for SpinOrbitScenario {
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

impl SplitForm for SpinOrbitScenario {
    fn h0(&self, m: &PhasePoint) -> f64 {
        m.p3().norm_squared() / (2.0 * self.constants.m_eff)
    }
    fn h1(&self, m: &PhasePoint) -> Vector3<f64> {
        let (r, t) = (m.r3(), m.t());
        self.magnetic.value(&r, t) * self.constants.chi + self.electric.value(&r, t).cross(&m.p3()) * self.constants.rho
    }
    fn spin(&self) -> SpinRep {
        SpinRep::Pauli
    }
}
