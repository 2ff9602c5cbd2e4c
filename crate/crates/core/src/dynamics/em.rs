//! External electromagnetic fields and the effective fields seen by a
//! Zeeman spin state.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::gauge::curvature::{pseudovector_of, Block};
use crate::phase_space::PhasePoint;
use crate::scenarios::fields::{Field, VectorField};
use crate::scenarios::zeeman::ZeemanScenario;
use crate::spectral::HamiltonianModel;

/// Electric and magnetic fields over `(r, t)`; charge and `c` come from the
/// model constants.
#[derive(Clone)]
pub struct ExternalEMField {
    electric: Arc<dyn VectorField>,
    magnetic: Arc<dyn VectorField>,
}

impl std::fmt::Debug for ExternalEMField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExternalEMField")
    }
}

impl ExternalEMField {
    pub fn new(electric: Arc<dyn VectorField>, magnetic: Arc<dyn VectorField>) -> Self {
        ExternalEMField { electric, magnetic }
    }

    pub fn from_fields(electric: Field, magnetic: Field) -> Self {
        Self::new(Arc::new(electric), Arc::new(magnetic))
    }

    pub fn uniform(electric: Vector3<f64>, magnetic: Vector3<f64>) -> Self {
        Self::from_fields(Field::uniform(electric), Field::uniform(magnetic))
    }

    pub fn electric(&self, m: &PhasePoint) -> Vector3<f64> {
        self.electric.value(&m.r3(), m.t())
    }

    pub fn magnetic(&self, m: &PhasePoint) -> Vector3<f64> {
        self.magnetic.value(&m.r3(), m.t())
    }
}

/// Effective `(B_eff, E_eff)` for the given band of a Zeeman model. The
/// magnetic field acting on the charge is the Zeeman field itself; an
/// optional electric field is added to `E_eff`.
///
/// The spin curvature enters the momentum equation as `ħF_rr·ṙ + ħF_rt`;
/// writing that as a Lorentz force `(e/c)ṙ × B_spin + eE_spin` gives
/// `B_spin = (ħc/e)·F_rr` (pseudovector) and `E_spin = (ħ/e)·F_rt`.
pub fn effective_em_fields(
    scn: &ZeemanScenario,
    m: &PhasePoint,
    band: usize,
    electric: Option<&ExternalEMField>,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    if band >= 2 {
        return Err(Error::InvalidInput(format!("band {band} out of range")));
    }
    let k = scn.constants();
    if k.e == 0.0 {
        return Err(Error::InvalidInput("effective fields need a nonzero charge".into()));
    }
    let f = scn.analytic(m)?.curvature;
    let b_spin = pseudovector_of(&f.block(band, Block::RR)) * (k.hbar * k.c / k.e);
    let rt = f.block(band, Block::RT);
    let mut e_spin = Vector3::zeros();
    for i in 0..rt.nrows() {
        e_spin[i] = rt[(i, 0)] * k.hbar / k.e;
    }
    let b0 = scn.b_at(m);
    let e0 = electric.map_or_else(Vector3::zeros, |em| em.electric(m));
    Ok((b0 + b_spin, e0 + e_spin))
}
