//! Exact and adiabatic connections `A = i U† ∂U` by central differences.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::{axis_labels, PhasePoint};
use crate::spectral::{diagonalize, diagonalize_like, CMatrix, CVector, EigenFrame, HamiltonianModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    Exact,
    Adiabatic,
}

/// Connection components over the `2d + 1` phase-space axes at one point.
#[derive(Debug, Clone)]
pub struct Connection {
    point: PhasePoint,
    kind: ConnectionKind,
    components: Vec<CMatrix>,
}

impl Connection {
    pub fn new(point: PhasePoint, kind: ConnectionKind, components: Vec<CMatrix>) -> Self {
        Connection {
            point,
            kind,
            components,
        }
    }

    pub fn zero(point: PhasePoint, bands: usize, kind: ConnectionKind) -> Self {
        let components = vec![CMatrix::zeros(bands, bands); point.axis_count()];
        Connection::new(point, kind, components)
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn point(&self) -> &PhasePoint {
        &self.point
    }

    pub fn directions(&self) -> Vec<String> {
        axis_labels(self.point.dim())
    }

    pub fn bands(&self) -> usize {
        self.components.first().map_or(0, |c| c.nrows())
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &CMatrix {
        &self.components[axis]
    }

    /// Diagonal part, real by construction.
    pub fn adiabatic(&self) -> Connection {
        let components = self
            .components
            .iter()
            .map(|a| {
                let n = a.nrows();
                CMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        Complex64::new(a[(i, i)].re, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Connection::new(self.point, ConnectionKind::Adiabatic, components)
    }

    /// `A^{(ad)}_k` for `band`, one entry per axis.
    pub fn band_components(&self, band: usize) -> Vec<f64> {
        self.components.iter().map(|a| a[(band, band)].re).collect()
    }

    /// Largest `|A_k − A_k†|` over components.
    pub fn hermiticity_residual(&self) -> f64 {
        self.components
            .iter()
            .map(|a| {
                (a - a.adjoint())
                    .iter()
                    .fold(0.0f64, |acc, z| acc.max(z.norm()))
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::Step(step))
    }
}

/// Exact connection at `m` expressed in the gauge of `reference`: stencil and
/// center frames are band-matched to it and phase-fixed on its anchors.
pub fn exact_connection_in_gauge(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    step: f64,
    reference: &EigenFrame,
) -> Result<Connection> {
    check_step(step)?;
    let center = diagonalize_like(model, m, reference)?;
    let u0_adj = center.unitary().adjoint();
    let scale = Complex64::new(0.0, 1.0 / (2.0 * step));
    let mut components = Vec::with_capacity(m.axis_count());
    for k in 0..m.axis_count() {
        let plus = diagonalize_like(model, &m.shifted(k, step), reference)?;
        let minus = diagonalize_like(model, &m.shifted(k, -step), reference)?;
        let du = plus.unitary() - minus.unitary();
        components.push(&u0_adj * du * scale);
    }
    Ok(Connection::new(*m, ConnectionKind::Exact, components))
}

/// `A_k = i U†(m) ∂U/∂m_k` by central differences of step `step`, in the
/// isolated-point phase convention of `m`.
pub fn exact_connection(model: &dyn HamiltonianModel, m: &PhasePoint, step: f64) -> Result<Connection> {
    check_step(step)?;
    let reference = diagonalize(model, m)?;
    exact_connection_in_gauge(model, m, step, &reference)
}

/// Diagonal connection `A^{(ad)}_{bb} = −Im⟨u_b|∂u_b⟩`, one pass per axis.
pub fn adiabatic_connection(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    step: f64,
    anchors: Option<&[usize]>,
) -> Result<Connection> {
    check_step(step)?;
    let mut center = diagonalize(model, m)?;
    if let Some(a) = anchors {
        center.rephase(a)?;
    }
    let n = center.bands();
    let mut components = Vec::with_capacity(m.axis_count());
    for k in 0..m.axis_count() {
        let plus = diagonalize_like(model, &m.shifted(k, step), &center)?;
        let minus = diagonalize_like(model, &m.shifted(k, -step), &center)?;
        let mut a = CMatrix::zeros(n, n);
        for b in 0..n {
            let d = center.overlap(b, &plus, b) - center.overlap(b, &minus, b);
            a[(b, b)] = Complex64::new(-d.im / (2.0 * step), 0.0);
        }
        components.push(a);
    }
    Ok(Connection::new(*m, ConnectionKind::Adiabatic, components))
}

/// Per-pair values of `∂_i A_j − ∂_j A_i − i[A_i, A_j]`.
#[derive(Debug, Clone)]
pub struct NonAbelianCurvature {
    axes: usize,
    values: Vec<CMatrix>,
}

impl NonAbelianCurvature {
    pub fn get(&self, i: usize, j: usize) -> &CMatrix {
        &self.values[i * self.axes + j]
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    /// Largest entry magnitude over all pairs.
    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }
}

/// Field strength of the exact connection at `m`.
///
/// Every connection in the stencil is expressed in the gauge of the frame at
/// `m`, so the derivative of `A` is taken in one smooth gauge. For the pure
/// gauge `A = iU†∂U` the result vanishes up to discretization error;
/// `with_commutator = false` drops the `−i[A_i, A_j]` term.
pub fn nonabelian_curvature(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    step: f64,
    with_commutator: bool,
) -> Result<NonAbelianCurvature> {
    check_step(step)?;
    let reference = diagonalize(model, m)?;
    let axes = m.axis_count();
    let center = exact_connection_in_gauge(model, m, step, &reference)?;
    let mut derivs: Vec<Vec<CMatrix>> = Vec::with_capacity(axes);
    for i in 0..axes {
        let plus = exact_connection_in_gauge(model, &m.shifted(i, step), step, &reference)?;
        let minus = exact_connection_in_gauge(model, &m.shifted(i, -step), step, &reference)?;
        let row = (0..axes)
            .map(|j| (plus.component(j) - minus.component(j)) / Complex64::from(2.0 * step))
            .collect();
        derivs.push(row);
    }
    let n = center.bands();
    let i_unit = Complex64::new(0.0, 1.0);
    let mut values = vec![CMatrix::zeros(n, n); axes * axes];
    for i in 0..axes {
        for j in 0..axes {
            if i == j {
                continue;
            }
            let mut f = &derivs[i][j] - &derivs[j][i];
            if with_commutator {
                let (ai, aj) = (center.component(i), center.component(j));
                f -= (ai * aj - aj * ai) * i_unit;
            }
            values[i * axes + j] = f;
        }
    }
    Ok(NonAbelianCurvature { axes, values })
}

/// Adiabatic connection of a single band with its phase pinned on component
/// `anchor`, together with the frame at `m`.
pub fn band_connection(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    band: usize,
    anchor: usize,
    step: f64,
) -> Result<(Vec<f64>, EigenFrame)> {
    check_step(step)?;
    let center = diagonalize(model, m)?;
    if band >= center.bands() || anchor >= center.bands() {
        return Err(Error::InvalidInput(format!("band {band} or anchor {anchor} out of range")));
    }
    let pin = |f: &EigenFrame| -> Result<CVector> {
        let u = f.column(band);
        let z = u[anchor];
        if z.norm() < 1e-12 {
            return Err(Error::GaugePatch(format!("anchor {anchor} of band {band} vanishes at {}", f.point())));
        }
        Ok(u * (z.conj() / z.norm()))
    };
    let u0 = pin(&center)?;
    let mut a = Vec::with_capacity(m.axis_count());
    for k in 0..m.axis_count() {
        let plus = diagonalize_like(model, &m.shifted(k, step), &center).and_then(|f| pin(&f))?;
        let minus = diagonalize_like(model, &m.shifted(k, -step), &center).and_then(|f| pin(&f))?;
        let d = u0.dotc(&(plus - minus));
        a.push(-d.im / (2.0 * step));
    }
    Ok((a, center))
}
