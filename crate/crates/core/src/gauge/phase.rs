//! Adiabatic connection fields, gauge changes and phase line integrals.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::gauge::connection::{adiabatic_connection, check_step, Connection, ConnectionKind};
use crate::gauge::curvature::CurvatureTensor;
use crate::par::{pairwise_sum, Execution};
use crate::phase_space::{Constants, PhasePoint};
use crate::spectral::{diagonalize, HamiltonianModel, TRACKING_MIN_OVERLAP};

/// A smooth adiabatic connection `A^{(ad)}` over phase space, in one fixed gauge.
pub trait ConnectionField: Sync {
    fn bands(&self) -> usize;
    /// `[band][axis]` components at `m`.
    fn adiabatic_at(&self, m: &PhasePoint) -> Result<Vec<Vec<f64>>>;
    /// Refuse a path segment the field cannot continue across.
    fn check_segment(&self, _index: usize, _a: &PhasePoint, _b: &PhasePoint) -> Result<()> {
        Ok(())
    }
}

pub const DEFAULT_CONNECTION_REL_STEP: f64 = 1e-5;

/// Connection of a model with eigenvector phases pinned to fixed anchor
/// components, which makes it a single smooth gauge wherever those
/// components stay away from zero.
pub struct ModelConnectionField<'a> {
    model: &'a dyn HamiltonianModel,
    rel_step: f64,
    anchors: Option<Vec<usize>>,
}

impl<'a> ModelConnectionField<'a> {
    /// Per-point phase convention (largest component of each eigenvector).
    pub fn new(model: &'a dyn HamiltonianModel) -> Self {
        ModelConnectionField {
            model,
            rel_step: DEFAULT_CONNECTION_REL_STEP,
            anchors: None,
        }
    }

    pub fn with_rel_step(mut self, rel_step: f64) -> Self {
        self.rel_step = rel_step;
        self
    }

    /// Gauge fixed by the anchors of the frame at `m`.
    pub fn anchored_at(model: &'a dyn HamiltonianModel, m: &PhasePoint) -> Result<Self> {
        let frame = diagonalize(model, m)?;
        Ok(ModelConnectionField {
            model,
            rel_step: DEFAULT_CONNECTION_REL_STEP,
            anchors: Some(frame.anchors().to_vec()),
        })
    }

    /// One gauge for a whole path: per band, the component whose smallest
    /// magnitude along the path is largest.
    pub fn for_path(model: &'a dyn HamiltonianModel, path: &[PhasePoint]) -> Result<Self> {
        let n = model.bands();
        let frames = Execution::default().map(path.len(), |i| diagonalize(model, &path[i]));
        let mut floor = vec![vec![f64::INFINITY; n]; n];
        for frame in frames {
            let frame = frame?;
            let u = frame.unitary();
            for b in 0..n {
                for c in 0..n {
                    floor[b][c] = floor[b][c].min(u[(c, b)].norm());
                }
            }
        }
        let mut anchors = Vec::with_capacity(n);
        for (b, row) in floor.iter().enumerate() {
            let (best, mag) = row
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (c, &v)| if v > acc.1 { (c, v) } else { acc });
            if mag < 1e-3 {
                return Err(Error::GaugePatch(format!(
                    "no single gauge covers the path for band {b} (best anchor magnitude {mag:.3e})"
                )));
            }
            anchors.push(best);
        }
        Ok(ModelConnectionField {
            model,
            rel_step: DEFAULT_CONNECTION_REL_STEP,
            anchors: Some(anchors),
        })
    }

    pub fn anchors(&self) -> Option<&[usize]> {
        self.anchors.as_deref()
    }

    pub fn connection_at(&self, m: &PhasePoint) -> Result<Connection> {
        adiabatic_connection(self.model, m, m.scaled_step(self.rel_step), self.anchors.as_deref())
    }
}

impl ConnectionField for ModelConnectionField<'_> {
    fn bands(&self) -> usize {
        self.model.bands()
    }

    fn adiabatic_at(&self, m: &PhasePoint) -> Result<Vec<Vec<f64>>> {
        let c = self.connection_at(m)?;
        Ok((0..c.bands()).map(|b| c.band_components(b)).collect())
    }

    fn check_segment(&self, index: usize, a: &PhasePoint, b: &PhasePoint) -> Result<()> {
        let fa = diagonalize(self.model, a)?;
        let fb = diagonalize(self.model, b)?;
        for band in 0..fa.bands() {
            let overlap = fa.overlap(band, &fb, band).norm();
            if overlap < TRACKING_MIN_OVERLAP {
                return Err(Error::BandTracking { index, overlap });
            }
        }
        Ok(())
    }
}

/// `A → A − ∂φ/∂m` for a per-band scalar phase field, gradient by central
/// differences.
pub struct Regauged<'a, P> {
    inner: &'a dyn ConnectionField,
    phase: P,
    step: f64,
}

impl<'a, P> Regauged<'a, P>
where
    P: Fn(&PhasePoint) -> Vec<f64> + Sync,
{
    pub fn new(inner: &'a dyn ConnectionField, phase: P, step: f64) -> Result<Self> {
        check_step(step)?;
        Ok(Regauged { inner, phase, step })
    }
}

fn phase_gradient<P: Fn(&PhasePoint) -> Vec<f64>>(phase: &P, m: &PhasePoint, step: f64) -> Vec<Vec<f64>> {
    let axes = m.axis_count();
    let mut cols = Vec::with_capacity(axes);
    for k in 0..axes {
        let plus = phase(&m.shifted(k, step));
        let minus = phase(&m.shifted(k, -step));
        cols.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect::<Vec<f64>>(),
        );
    }
    let bands = cols.first().map_or(0, Vec::len);
    (0..bands).map(|b| (0..axes).map(|k| cols[k][b]).collect()).collect()
}

impl<P> ConnectionField for Regauged<'_, P>
where
    P: Fn(&PhasePoint) -> Vec<f64> + Sync,
{
    fn bands(&self) -> usize {
        self.inner.bands()
    }

    fn adiabatic_at(&self, m: &PhasePoint) -> Result<Vec<Vec<f64>>> {
        let mut a = self.inner.adiabatic_at(m)?;
        let g = phase_gradient(&self.phase, m, self.step);
        for (ab, gb) in a.iter_mut().zip(&g) {
            for (x, y) in ab.iter_mut().zip(gb) {
                *x -= y;
            }
        }
        Ok(a)
    }

    fn check_segment(&self, index: usize, a: &PhasePoint, b: &PhasePoint) -> Result<()> {
        self.inner.check_segment(index, a, b)
    }
}

/// Regauge a single connection value: `A_k → A_k − ∂_k φ_b` on the diagonal.
pub fn regauge<P>(connection: &Connection, phase: P, step: f64) -> Result<Connection>
where
    P: Fn(&PhasePoint) -> Vec<f64>,
{
    check_step(step)?;
    let m = connection.point();
    let g = phase_gradient(&phase, m, step);
    let mut adiabatic = connection.adiabatic();
    let comps: Vec<_> = adiabatic
        .components()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mut a = a.clone();
            for (b, gb) in g.iter().enumerate() {
                a[(b, b)] -= gb[k];
            }
            a
        })
        .collect();
    adiabatic = Connection::new(*m, ConnectionKind::Adiabatic, comps);
    Ok(adiabatic)
}

/// `F_ij = ∂_i A_j − ∂_j A_i` of a connection field by central differences.
pub fn curvature_from_connection(
    field: &dyn ConnectionField,
    m: &PhasePoint,
    step: f64,
) -> Result<CurvatureTensor> {
    check_step(step)?;
    let axes = m.axis_count();
    let mut derivs = Vec::with_capacity(axes);
    for i in 0..axes {
        let plus = field.adiabatic_at(&m.shifted(i, step))?;
        let minus = field.adiabatic_at(&m.shifted(i, -step))?;
        derivs.push((plus, minus));
    }
    let bands = field.bands();
    let mut out = CurvatureTensor::zeros(m.dim(), bands);
    for b in 0..bands {
        for i in 0..axes {
            for j in (i + 1)..axes {
                let di_aj = (derivs[i].0[b][j] - derivs[i].1[b][j]) / (2.0 * step);
                let dj_ai = (derivs[j].0[b][i] - derivs[j].1[b][i]) / (2.0 * step);
                out.set(b, i, j, di_aj - dj_ai);
            }
        }
    }
    Ok(out)
}

/// Accumulated phase, raw and reduced to `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePhase {
    pub raw: f64,
    pub wrapped: f64,
}

pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// `∫ A^{(ad)}_b · dm` along a polygonal path, composite trapezoid.
pub fn phase_line_integral(field: &dyn ConnectionField, path: &[PhasePoint], band: usize) -> Result<LinePhase> {
    if band >= field.bands() {
        return Err(Error::InvalidInput(format!("band {band} out of range")));
    }
    if path.len() < 2 {
        return Ok(LinePhase { raw: 0.0, wrapped: 0.0 });
    }
    let dim = path[0].dim();
    if path.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidInput("path mixes spatial dimensions".into()));
    }
    let exec = Execution::default();
    let values = exec.map(path.len(), |i| field.adiabatic_at(&path[i]).map(|a| a[band].clone()));
    let checks = exec.map(path.len() - 1, |i| field.check_segment(i + 1, &path[i], &path[i + 1]));
    for c in checks {
        c?;
    }
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let terms: Vec<f64> = (0..path.len() - 1)
        .map(|i| {
            let (a, b) = (&path[i], &path[i + 1]);
            (0..a.axis_count())
                .map(|k| 0.5 * (values[i][k] + values[i + 1][k]) * (b.coord(k) - a.coord(k)))
                .sum()
        })
        .collect();
    let raw = pairwise_sum(&terms);
    Ok(LinePhase {
        raw,
        wrapped: wrap_phase(raw),
    })
}

/// Electromagnetic phase `(e/ħc) ∫ (A·dr − c·A⁰ dt)` along a path of
/// `(r, t)` samples, composite trapezoid. `potential` returns `(A⁰, A)`.
pub fn dirac_phase<F>(potential: F, path: &[(Vector3<f64>, f64)], constants: &Constants) -> Result<f64>
where
    F: Fn(&Vector3<f64>, f64) -> (f64, Vector3<f64>),
{
    constants.validate()?;
    let vals: Vec<(f64, Vector3<f64>)> = path.iter().map(|(r, t)| potential(r, *t)).collect();
    if vals.iter().any(|(a0, a)| !a0.is_finite() || a.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidInput("potential is not finite along the path".into()));
    }
    let terms: Vec<f64> = path
        .windows(2)
        .zip(vals.windows(2))
        .map(|(seg, v)| {
            let dr = seg[1].0 - seg[0].0;
            let dt = seg[1].1 - seg[0].1;
            let a = 0.5 * (v[0].1 + v[1].1);
            let a0 = 0.5 * (v[0].0 + v[1].0);
            a.dot(&dr) - constants.c * a0 * dt
        })
        .collect();
    Ok(constants.e / (constants.hbar * constants.c) * pairwise_sum(&terms))
}
