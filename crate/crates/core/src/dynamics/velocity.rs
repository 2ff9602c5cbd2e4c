//! Adiabatic semiclassical velocities with spin-gauge and Lorentz forces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::{CENTRAL4_OFFSETS, CENTRAL4_WEIGHTS};
use crate::gauge::connection::check_step;
use crate::gauge::curvature::{adiabatic_curvature_numeric_with, curvature_m_space, CurvatureTensor, PlaquetteOptions};
use crate::phase_space::PhasePoint;
use crate::dynamics::em::ExternalEMField;
use crate::spectral::{diagonalize, evaluate, EigenFrame, HamiltonianModel};

/// Where the band curvature comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureSource {
    /// Split-form pullback when the model has one, plaquettes otherwise.
    Auto,
    SplitForm { step: Option<f64> },
    Plaquette(PlaquetteOptions),
    /// Drop all spin-gauge forces.
    Zero,
}

/// How the velocity dependence of the force terms is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Solve the linear system for `(ṗ, ṙ)` exactly.
    Exact,
    /// Evaluate spin forces on zeroth-order velocities: those of `H0` with
    /// the electromagnetic force for split-form models, of the band energy
    /// otherwise.
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityOptions {
    pub curvature: CurvatureSource,
    pub coupling: Coupling,
    /// Relative step of the energy gradient stencil; `None` means `1e-3`.
    pub gradient_step: Option<f64>,
}

impl Default for VelocityOptions {
    fn default() -> Self {
        VelocityOptions {
            curvature: CurvatureSource::Auto,
            coupling: Coupling::Exact,
            gradient_step: None,
        }
    }
}

/// Phase-space velocity of one band at one point, with the pieces that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub p_dot: Vec<f64>,
    pub r_dot: Vec<f64>,
    pub energy: f64,
    /// Distance to the nearest other level.
    pub spacing: f64,
    pub grad_p: Vec<f64>,
    pub grad_r: Vec<f64>,
    /// `∂E/∂t`.
    pub grad_t: f64,
    /// `ħ F_rm·ṁ`.
    pub spin_force_p: Vec<f64>,
    /// `−ħ F_pm·ṁ`.
    pub spin_force_r: Vec<f64>,
    /// `|spin terms| / |zeroth-order terms|`; small when the spin forces are
    /// perturbative.
    pub spin_ratio: f64,
}

impl Velocity {
    /// `(ṗ, ṙ, 1)` over all phase-space axes.
    pub fn m_dot(&self) -> Vec<f64> {
        let mut v = self.p_dot.clone();
        v.extend_from_slice(&self.r_dot);
        v.push(1.0);
        v
    }
}

pub const DEFAULT_GRADIENT_REL_STEP: f64 = 1e-3;

fn scalar_gradient<F: Fn(&PhasePoint) -> f64>(f: F, m: &PhasePoint, rel_step: Option<f64>) -> Result<Vec<f64>> {
    let h = m.scaled_step(rel_step.unwrap_or(DEFAULT_GRADIENT_REL_STEP));
    check_step(h)?;
    Ok((0..m.axis_count())
        .map(|k| {
            CENTRAL4_OFFSETS
                .iter()
                .zip(CENTRAL4_WEIGHTS)
                .map(|(off, w)| w * f(&m.shifted(k, off * h)))
                .sum::<f64>()
                / h
        })
        .collect())
}

/// Band energy gradient over all axes by Hellmann–Feynman,
/// `∂_k E_b = ⟨u_b|∂_k H|u_b⟩`, with a fourth-order stencil for `∂_k H`.
pub fn energy_gradient(
    model: &dyn HamiltonianModel,
    band: usize,
    m: &PhasePoint,
    rel_step: Option<f64>,
) -> Result<(EigenFrame, Vec<f64>)> {
    let frame = diagonalize(model, m)?;
    if band >= frame.bands() {
        return Err(Error::InvalidInput(format!("band {band} out of range")));
    }
    let h = m.scaled_step(rel_step.unwrap_or(DEFAULT_GRADIENT_REL_STEP));
    check_step(h)?;
    let u = frame.column(band);
    let mut grad = Vec::with_capacity(m.axis_count());
    for k in 0..m.axis_count() {
        let mut acc = 0.0;
        for (off, w) in CENTRAL4_OFFSETS.iter().zip(CENTRAL4_WEIGHTS) {
            let hk = evaluate(model, &m.shifted(k, off * h))?;
            acc += w * u.dotc(&(&hk * &u)).re;
        }
        grad.push(acc / h);
    }
    Ok((frame, grad))
}

pub fn band_curvature(model: &dyn HamiltonianModel, m: &PhasePoint, source: &CurvatureSource) -> Result<Option<CurvatureTensor>> {
    match source {
        CurvatureSource::Zero => Ok(None),
        CurvatureSource::SplitForm { step } => curvature_m_space(model, m, *step).map(Some),
        CurvatureSource::Plaquette(o) => adiabatic_curvature_numeric_with(model, m, o).map(Some),
        CurvatureSource::Auto => match model.split_form() {
            Some(_) => curvature_m_space(model, m, None).map(Some),
            None => adiabatic_curvature_numeric_with(model, m, &PlaquetteOptions::default()).map(Some),
        },
    }
}

const SINGULAR_DET: f64 = 1e-10;

fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let det = lu.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::SingularSystem { det });
    }
    lu.solve(b).ok_or(Error::SingularSystem { det })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve `ṗ = −∂E/∂r + eE + (e/c)(ṙ × B) + ħF_rm·ṁ`,
/// `ṙ = ∂E/∂p − ħF_pm·ṁ` with `ṁ = (ṗ, ṙ, 1)`.
pub fn velocity_field(
    model: &dyn HamiltonianModel,
    band: usize,
    m: &PhasePoint,
    em: Option<&ExternalEMField>,
    options: &VelocityOptions,
) -> Result<Velocity> {
    let d = m.dim();
    let k = *model.constants();
    let (frame, grad) = energy_gradient(model, band, m, options.gradient_step)?;
    let curvature = band_curvature(model, m, &options.curvature)?;
    let f = |i: usize, j: usize| curvature.as_ref().map_or(0.0, |c| c.get(band, i, j));
    let (t, pi, ri) = (2 * d, |i: usize| i, |i: usize| d + i);

    let (efield, bfield) = match em {
        Some(em) => (em.electric(m), em.magnetic(m)),
        None => (Default::default(), Default::default()),
    };
    let efield: nalgebra::Vector3<f64> = efield;
    let bfield: nalgebra::Vector3<f64> = bfield;
    // (ṙ × B)_i = Σ_j L_ij ṙ_j
    let lorentz = |i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for kk in 0..3 {
            let eps = levi_civita(i, j, kk);
            if eps != 0.0 {
                s += eps * bfield[kk];
            }
        }
        s
    };

    let n = 2 * d;
    let mut b0 = DVector::zeros(n);
    let mut bs = DVector::zeros(n);
    let mut m_em = DMatrix::zeros(n, n);
    let mut m_spin = DMatrix::zeros(n, n);
    for i in 0..d {
        b0[i] = -grad[ri(i)] + k.e * efield[i];
        bs[i] = k.hbar * f(ri(i), t);
        b0[d + i] = grad[pi(i)];
        bs[d + i] = -k.hbar * f(pi(i), t);
        for j in 0..d {
            m_spin[(i, j)] = k.hbar * f(ri(i), pi(j));
            m_spin[(i, d + j)] = k.hbar * f(ri(i), ri(j));
            m_em[(i, d + j)] = k.e / k.c * lorentz(i, j);
            m_spin[(d + i, j)] = -k.hbar * f(pi(i), pi(j));
            m_spin[(d + i, d + j)] = -k.hbar * f(pi(i), ri(j));
        }
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let (x, spin) = match options.coupling {
        Coupling::Exact => {
            let x = solve(&eye - &m_em - &m_spin, &(&b0 + &bs))?;
            let spin = &bs + &m_spin * &x;
            (x, spin)
        }
        Coupling::Perturbative => {
            let a = &eye - &m_em;
            let zeroth_rhs = match model.split_form() {
                Some(sf) => {
                    let g = scalar_gradient(|q| sf.h0(q), m, options.gradient_step)?;
                    let mut r = DVector::zeros(n);
                    for i in 0..d {
                        r[i] = -g[ri(i)] + k.e * efield[i];
                        r[d + i] = g[pi(i)];
                    }
                    r
                }
                None => b0.clone(),
            };
            let x0 = solve(a.clone(), &zeroth_rhs)?;
            let s = &bs + &m_spin * &x0;
            (solve(a, &(&b0 + &s))?, s)
        }
    };
    let zeroth = &b0 + &m_em * &x;
    let zn = zeroth.norm();
    let sn = spin.norm();
    let spin_ratio = if zn > 0.0 { sn / zn } else if sn > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(Velocity {
        p_dot: x.rows(0, d).iter().copied().collect(),
        r_dot: x.rows(d, d).iter().copied().collect(),
        energy: frame.energy(band),
        spacing: frame.level_spacing(band),
        grad_p: grad[..d].to_vec(),
        grad_r: grad[d..2 * d].to_vec(),
        grad_t: grad[t],
        spin_force_p: spin.rows(0, d).iter().copied().collect(),
        spin_force_r: spin.rows(d, d).iter().copied().collect(),
        spin_ratio,
    })
}

pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Euclidean norm helper shared with the integrator.
pub(crate) fn vec_norm(v: &[f64]) -> f64 {
    norm(v)
}
