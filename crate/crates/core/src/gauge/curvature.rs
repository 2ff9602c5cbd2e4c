//! Adiabatic curvature: gauge-invariant plaquettes, the monopole form and its
//! pullback to phase space.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd::jacobian4;
use crate::gauge::connection::check_step;
use crate::phase_space::{Axis, PhasePoint};
use crate::spectral::{diagonalize, diagonalize_matrix, evaluate, spin_matrix, EigenFrame, HamiltonianModel, SpinCharge};

/// Named sub-blocks of a phase-space curvature tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    PP,
    RR,
    /// Rows `p_i`, columns `r_j`.
    PR,
    /// Column over `p_i`.
    PT,
    /// Column over `r_i`.
    RT,
}

impl Block {
    pub const ALL: [Block; 5] = [Block::PP, Block::RR, Block::PR, Block::PT, Block::RT];

    pub fn name(self) -> &'static str {
        match self {
            Block::PP => "pp",
            Block::RR => "rr",
            Block::PR => "pr",
            Block::PT => "pt",
            Block::RT => "rt",
        }
    }
}

/// Per-band antisymmetric `D × D` curvature over the phase-space axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    values: Vec<DMatrix<f64>>,
}

impl CurvatureTensor {
    pub fn zeros(dim: usize, bands: usize) -> Self {
        let d = 2 * dim + 1;
        CurvatureTensor {
            dim,
            values: vec![DMatrix::zeros(d, d); bands],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axes(&self) -> usize {
        2 * self.dim + 1
    }

    pub fn bands(&self) -> usize {
        self.values.len()
    }

    pub fn band(&self, b: usize) -> &DMatrix<f64> {
        &self.values[b]
    }

    pub fn get(&self, b: usize, i: usize, j: usize) -> f64 {
        self.values[b][(i, j)]
    }

    /// Set `F_ij = v` and `F_ji = −v`.
    pub fn set(&mut self, b: usize, i: usize, j: usize, v: f64) {
        self.values[b][(i, j)] = v;
        self.values[b][(j, i)] = -v;
    }

    pub fn at(&self, b: usize, i: Axis, j: Axis) -> f64 {
        self.get(b, i.index(self.dim), j.index(self.dim))
    }

    pub fn block(&self, b: usize, block: Block) -> DMatrix<f64> {
        let d = self.dim;
        let f = &self.values[b];
        match block {
            Block::PP => f.view((0, 0), (d, d)).into_owned(),
            Block::RR => f.view((d, d), (d, d)).into_owned(),
            Block::PR => f.view((0, d), (d, d)).into_owned(),
            Block::PT => f.view((0, 2 * d), (d, 1)).into_owned(),
            Block::RT => f.view((d, 2 * d), (d, 1)).into_owned(),
        }
    }

    /// Pseudovector `(F_23, F_31, F_12)` of the `pp` or `rr` block; in two
    /// dimensions only the normal component is nonzero.
    pub fn pseudovector(&self, b: usize, block: Block) -> Vector3<f64> {
        let m = self.block(b, block);
        assert!(matches!(block, Block::PP | Block::RR), "pseudovector needs a square spatial block");
        pseudovector_of(&m)
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// `max |F_a − F_b|` over bands and entries.
    pub fn max_difference(&self, other: &CurvatureTensor) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Difference measured against the larger of the two tensor norms, per band.
    pub fn relative_difference(&self, other: &CurvatureTensor) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let scale = a.amax().max(b.amax());
                let diff = (a - b).amax();
                if scale == 0.0 {
                    diff
                } else {
                    diff / scale
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> CurvatureTensor {
        CurvatureTensor {
            dim: self.dim,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub(crate) fn from_values(dim: usize, values: Vec<DMatrix<f64>>) -> Self {
        CurvatureTensor { dim, values }
    }
}

/// `(F_23, F_31, F_12)` of a 2×2 or 3×3 antisymmetric matrix.
pub fn pseudovector_of(m: &DMatrix<f64>) -> Vector3<f64> {
    if m.nrows() == 2 {
        Vector3::new(0.0, 0.0, m[(0, 1)])
    } else {
        Vector3::new(m[(1, 2)], m[(2, 0)], m[(0, 1)])
    }
}

/// `F_ij = ε_ijk v_k`.
pub fn tensor_of(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, v.z, -v.y, -v.z, 0.0, v.x, v.y, -v.x, 0.0)
}

/// Options for the plaquette evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlaquetteOptions {
    /// Edge length; `None` uses `1e-4 · max(1, |m|)`.
    pub step: Option<f64>,
    /// Combine edges `h` and `h/2` as `(4F(h/2) − F(h))/3`.
    pub richardson: bool,
}

pub const DEFAULT_PLAQUETTE_REL_STEP: f64 = 1e-4;

// Split-form models are diagonalized on the traceless spin part: same
// eigenvectors, and frames that do not depend on H0 at all.
fn plaquette_frame(model: &dyn HamiltonianModel, m: &PhasePoint) -> Result<EigenFrame> {
    match model.split_form() {
        Some(sf) => {
            evaluate(model, m)?;
            let h = spin_matrix(0.0, model.constants().hbar, &sf.h1(m), sf.spin());
            diagonalize_matrix(h, *m)
        }
        None => diagonalize(model, m),
    }
}

fn plaquette_pass(model: &dyn HamiltonianModel, m: &PhasePoint, h: f64, center: &EigenFrame) -> Result<CurvatureTensor> {
    let axes = m.axis_count();
    let n = center.bands();
    let mut out = CurvatureTensor::zeros(m.dim(), n);
    let half = 0.5 * h;
    for i in 0..axes {
        for j in (i + 1)..axes {
            let corner = |si: f64, sj: f64| -> Result<EigenFrame> {
                let p = m.shifted(i, si * half).shifted(j, sj * half);
                let mut f = plaquette_frame(model, &p)?;
                f.match_bands(center, 0)?;
                Ok(f)
            };
            let loop_frames = [corner(-1.0, -1.0)?, corner(1.0, -1.0)?, corner(1.0, 1.0)?, corner(-1.0, 1.0)?];
            for b in 0..n {
                let mut z = Complex64::new(1.0, 0.0);
                for k in 0..4 {
                    z *= loop_frames[k].overlap(b, &loop_frames[(k + 1) % 4], b);
                }
                out.set(b, i, j, -z.arg() / (h * h));
            }
        }
    }
    Ok(out)
}

/// Adiabatic curvature from the discrete holonomy of small plaquettes.
///
/// Each pair `(i, j)` uses the square centered on `m` with edge `h`, so the
/// result is second-order accurate and independent of eigenvector phases.
pub fn adiabatic_curvature_numeric_with(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    options: &PlaquetteOptions,
) -> Result<CurvatureTensor> {
    let h = options.step.unwrap_or_else(|| m.scaled_step(DEFAULT_PLAQUETTE_REL_STEP));
    check_step(h)?;
    let center = plaquette_frame(model, m)?;
    let coarse = plaquette_pass(model, m, h, &center)?;
    if !options.richardson {
        return Ok(coarse);
    }
    let fine = plaquette_pass(model, m, 0.5 * h, &center)?;
    let values = (0..center.bands())
        .map(|b| (fine.band(b) * 4.0 - coarse.band(b)) / 3.0)
        .collect();
    Ok(CurvatureTensor::from_values(m.dim(), values))
}

/// Plaquette curvature with edge `step` (`None` for the scaled default).
pub fn adiabatic_curvature_numeric(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    step: Option<f64>,
) -> Result<CurvatureTensor> {
    adiabatic_curvature_numeric_with(
        model,
        m,
        &PlaquetteOptions {
            step,
            richardson: false,
        },
    )
}

/// Monopole pseudovector `F = −S·H1/|H1|³`.
pub fn monopole_curvature(h1: &Vector3<f64>, s: SpinCharge) -> Result<Vector3<f64>> {
    let n = h1.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Singularity(format!("|H1| = {n} at the degeneracy point")));
    }
    Ok(h1 * (-s.value() / (n * n * n)))
}

/// `F_a = Jᵀ F_b J` where `J[k][i] = ∂b_k/∂a_i`.
pub fn pullback(jacobian: &DMatrix<f64>, f_b: &DMatrix<f64>) -> DMatrix<f64> {
    jacobian.transpose() * f_b * jacobian
}

/// Pull a curvature field on `b`-space back along `map` at the point `a`,
/// with a fourth-order numeric Jacobian.
pub fn pullback_curvature<M, F>(map: M, f_b: F, a: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    M: Fn(&[f64]) -> Vec<f64>,
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    check_step(step)?;
    let b = map(a);
    if b.iter().chain(a).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("pullback map is not finite".into()));
    }
    let j = jacobian4(&map, a, step);
    let jm = DMatrix::from_fn(b.len(), a.len(), |k, i| j[k][i]);
    if jm.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("pullback Jacobian is not finite".into()));
    }
    Ok(pullback(&jm, &f_b(&b)?))
}

pub const DEFAULT_JACOBIAN_REL_STEP: f64 = 1e-3;

/// `∂H1/∂m_k` for every axis, fourth-order central differences.
pub fn h1_jacobian(model: &dyn HamiltonianModel, m: &PhasePoint, step: f64) -> Result<Vec<Vector3<f64>>> {
    let sf = model
        .split_form()
        .ok_or_else(|| Error::InvalidInput("model has no split form".into()))?;
    check_step(step)?;
    let dim = m.dim();
    let j = jacobian4(
        |x| {
            let p = PhasePoint::from_coords(dim, x).expect("stencil point");
            sf.h1(&p).as_slice().to_vec()
        },
        &m.coords(),
        step,
    );
    Ok((0..m.axis_count())
        .map(|k| Vector3::new(j[0][k], j[1][k], j[2][k]))
        .collect())
}

/// Curvature of split-form models by pulling the monopole back along `H1(m)`:
/// `F_ij = −S·H1·(∂_i H1 × ∂_j H1)/|H1|³` per band.
pub fn curvature_m_space(model: &dyn HamiltonianModel, m: &PhasePoint, step: Option<f64>) -> Result<CurvatureTensor> {
    let sf = model
        .split_form()
        .ok_or_else(|| Error::InvalidInput("curvature_m_space needs a split-form model".into()))?;
    let h1 = sf.h1(m);
    let n = h1.norm();
    if !(n > 0.0) {
        return Err(Error::Singularity(format!("H1 = 0 at {m}")));
    }
    let h = step.unwrap_or_else(|| m.scaled_step(DEFAULT_JACOBIAN_REL_STEP));
    let grads = h1_jacobian(model, m, h)?;
    let charges = sf.spin().charges();
    let unit = h1 / (n * n * n);
    let axes = m.axis_count();
    let mut out = CurvatureTensor::zeros(m.dim(), charges.len());
    for i in 0..axes {
        for j in (i + 1)..axes {
            let base = unit.dot(&grads[i].cross(&grads[j]));
            for (b, s) in charges.iter().enumerate() {
                out.set(b, i, j, -s.value() * base);
            }
        }
    }
    Ok(out)
}
