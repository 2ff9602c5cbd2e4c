//! The adiabaticity parameter ε.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gauge::curvature::{h1_jacobian, DEFAULT_JACOBIAN_REL_STEP};
use crate::phase_space::PhasePoint;
use crate::spectral::HamiltonianModel;

use super::velocity::{energy_gradient, vec_norm};

/// ε together with its temporal and spatial parts (both already scaled by ħ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon {
    pub value: f64,
    pub temporal: f64,
    pub spatial: f64,
}

/// How the momentum scale `δp` of the spatial term is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaP {
    /// `gap/|∂E/∂p|`.
    #[default]
    Gap,
    Fixed(f64),
    /// `|H1|/‖∂H1/∂p‖`, the momentum over which the spin eigenvector turns
    /// (split-form models only). For a photon this is `|p|`.
    SpinTexture,
}

/// Resolve `δp` at `m`; `None` means unbounded (no spatial term).
pub fn delta_p_at(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    spacing: f64,
    grad_p: &[f64],
    rule: &DeltaP,
) -> Result<Option<f64>> {
    match *rule {
        DeltaP::Fixed(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        DeltaP::Fixed(v) => Err(Error::InvalidInput(format!("delta_p must be positive, got {v}"))),
        DeltaP::Gap => {
            let g = vec_norm(grad_p);
            Ok(if g > 0.0 { Some(spacing / g) } else { None })
        }
        DeltaP::SpinTexture => {
            let sf = model
                .split_form()
                .ok_or_else(|| Error::InvalidInput("spin-texture delta_p needs a split-form model".into()))?;
            let d = m.dim();
            let j = h1_jacobian(model, m, m.scaled_step(DEFAULT_JACOBIAN_REL_STEP))?;
            let jp = DMatrix::from_fn(3, d, |i, k| j[k][i]);
            let norm = jp.singular_values().max();
            Ok(if norm > 0.0 { Some(sf.h1(m).norm() / norm) } else { None })
        }
    }
}

/// `ε = ħ·max(|∂E/∂t|/δE², (|ṗ|/|ṙ|)/δp²)` from precomputed pieces.
///
/// The spatial part is zero when the particle is at rest or `δp` is unbounded.
pub fn epsilon_from_parts(
    hbar: f64,
    spacing: f64,
    grad_t: f64,
    p_dot: &[f64],
    r_dot: &[f64],
    delta_p: Option<f64>,
) -> Result<Epsilon> {
    if !(spacing > 0.0) {
        return Err(Error::Degeneracy {
            gap: spacing,
            tolerance: 0.0,
            point: "adiabaticity estimate".into(),
        });
    }
    let temporal = hbar * grad_t.abs() / (spacing * spacing);
    let rd = vec_norm(r_dot);
    let pd = vec_norm(p_dot);
    let spatial = match delta_p {
        Some(dp) if rd > 0.0 => hbar * (pd / rd) / (dp * dp),
        _ => 0.0,
    };
    Ok(Epsilon {
        value: temporal.max(spatial),
        temporal,
        spatial,
    })
}

/// ε for `band` at `m` moving with `m_dot = (ṗ, ṙ)` (a trailing `ṫ` is ignored).
pub fn adiabaticity_epsilon(
    model: &dyn HamiltonianModel,
    band: usize,
    m: &PhasePoint,
    m_dot: &[f64],
    delta_p: &DeltaP,
) -> Result<Epsilon> {
    let d = m.dim();
    if m_dot.len() < 2 * d {
        return Err(Error::InvalidInput(format!("ṁ needs {} components", 2 * d)));
    }
    let (frame, grad) = energy_gradient(model, band, m, None)?;
    let spacing = frame.level_spacing(band);
    let dp = delta_p_at(model, m, spacing, &grad[..d], delta_p)?;
    epsilon_from_parts(model.constants().hbar, spacing, grad[2 * d], &m_dot[..d], &m_dot[d..2 * d], dp)
}
