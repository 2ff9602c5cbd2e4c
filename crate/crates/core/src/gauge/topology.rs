//! Monopole charges by sphere quadrature and Maxwell-identity residuals.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
use crate::fd::{CENTRAL4_OFFSETS, CENTRAL4_WEIGHTS};
use crate::gauge::connection::check_step;
use crate::par::{pairwise_sum, Execution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuadrature {
    /// Gauss–Legendre nodes in `cos θ`.
    pub polar: usize,
    /// Uniform trapezoid nodes in `φ`.
    pub azimuthal: usize,
    /// Second radius used to cross-check the flux, as a multiple of the first.
    pub check_factor: f64,
    /// Relative tolerance between the two radii.
    pub tolerance: f64,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        SphereQuadrature {
            polar: 48,
            azimuthal: 96,
            check_factor: 1.5,
            tolerance: 1e-6,
        }
    }
}

/// `(1/2π) ∮ F·ds` over the sphere `|x − center| = radius`.
pub fn sphere_flux<F>(field: &F, center: &Vector3<f64>, radius: f64, quad: &SphereQuadrature, exec: Execution) -> Result<f64>
where
    F: Fn(&Vector3<f64>) -> Result<Vector3<f64>> + Sync,
{
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
    }
    let polar = NonZeroUsize::new(quad.polar.max(2)).expect("nonzero");
    let nodes: Vec<(f64, f64)> = GaussLegendre::new(polar).as_node_weight_pairs().to_vec();
    let nphi = quad.azimuthal.max(3);
    let dphi = 2.0 * PI / nphi as f64;
    let total = nodes.len() * nphi;
    let terms = exec.map(total, |idx| -> Result<f64> {
        let (ct, w) = nodes[idx / nphi];
        let phi = (idx % nphi) as f64 * dphi;
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let n = Vector3::new(st * phi.cos(), st * phi.sin(), ct);
        let f = field(&(center + n * radius))?;
        Ok(w * dphi * radius * radius * f.dot(&n))
    });
    let terms = terms.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms) / (2.0 * PI))
}

/// Topological charge of the curvature pseudovector field enclosed by a sphere.
///
/// The flux is evaluated at `radius` and `check_factor · radius`; a mismatch
/// means the two spheres enclose different singularities (or the field is not
/// closed) and is reported as `Quadrature`.
pub fn chern_charge<F>(field: &F, center: &Vector3<f64>, radius: f64, quad: &SphereQuadrature, exec: Execution) -> Result<f64>
where
    F: Fn(&Vector3<f64>) -> Result<Vector3<f64>> + Sync,
{
    let inner = sphere_flux(field, center, radius, quad, exec)?;
    let outer_radius = radius * quad.check_factor;
    let outer = sphere_flux(field, center, outer_radius, quad, exec)?;
    if (inner - outer).abs() > quad.tolerance * inner.abs().max(1.0) {
        return Err(Error::Quadrature {
            inner_radius: radius,
            outer_radius,
            inner,
            outer,
        });
    }
    Ok(inner)
}

/// Residuals of `∂_j F_ij = 0` and the cyclic identity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellResiduals {
    /// `Σ_j ∂_j F_ij` per axis `i`.
    pub divergence: Vec<f64>,
    /// `∂_k F_ij + ∂_i F_jk + ∂_j F_ki` per triple `i < j < k`.
    pub cyclic: Vec<((usize, usize, usize), f64)>,
}

impl MaxwellResiduals {
    pub fn max_divergence(&self) -> f64 {
        self.divergence.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_cyclic(&self) -> f64 {
        self.cyclic.iter().fold(0.0, |a, (_, x)| a.max(x.abs()))
    }
}

/// Fourth-order central differences of an antisymmetric tensor field at `x`.
pub fn maxwell_residuals<F>(field: &F, x: &[f64], step: f64) -> Result<MaxwellResiduals>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    check_step(step)?;
    let n = x.len();
    let mut grads: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut probe = x.to_vec();
    for k in 0..n {
        let mut acc = DMatrix::zeros(n, n);
        for (off, w) in CENTRAL4_OFFSETS.iter().zip(CENTRAL4_WEIGHTS) {
            probe[k] = x[k] + off * step;
            let f = field(&probe)?;
            if f.nrows() != n || f.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "tensor field returned {}x{}, expected {n}x{n}",
                    f.nrows(),
                    f.ncols()
                )));
            }
            acc += f * w;
        }
        probe[k] = x[k];
        grads.push(acc / step);
    }
    let divergence = (0..n).map(|i| (0..n).map(|j| grads[j][(i, j)]).sum()).collect();
    let mut cyclic = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let r = grads[k][(i, j)] + grads[i][(j, k)] + grads[j][(k, i)];
                cyclic.push(((i, j, k), r));
            }
        }
    }
    Ok(MaxwellResiduals { divergence, cyclic })
}

/// Largest divergence and cyclic residuals over a set of points.
pub fn max_maxwell_residuals<F>(field: &F, points: &[Vec<f64>], step: f64, exec: Execution) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>> + Sync,
{
    let res = exec.map(points.len(), |i| maxwell_residuals(field, &points[i], step));
    let mut worst = (0.0f64, 0.0f64);
    for r in res {
        let r = r?;
        worst.0 = worst.0.max(r.max_divergence());
        worst.1 = worst.1.max(r.max_cyclic());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tensor_has_no_residual() {
        let f = |_x: &[f64]| Ok(DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]));
        let r = maxwell_residuals(&f, &[0.1, 0.2, 0.3], 1e-3).unwrap();
        assert!(r.max_divergence() < 1e-10);
        assert!(r.max_cyclic() < 1e-10);
    }

    #[test]
    fn non_closed_form_is_detected() {
        // F_12 = x_3^2
        let f = |x: &[f64]| {
            let mut m = DMatrix::zeros(3, 3);
            m[(0, 1)] = x[2] * x[2];
            m[(1, 0)] = -x[2] * x[2];
            Ok(m)
        };
        let r = maxwell_residuals(&f, &[0.0, 0.0, 0.5], 1e-3).unwrap();
        assert!((r.max_cyclic() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_field_has_no_charge() {
        let f = |_x: &Vector3<f64>| Ok(Vector3::new(0.3, -0.2, 1.0));
        let q = chern_charge(&f, &Vector3::zeros(), 1.0, &SphereQuadrature::default(), Execution::Sequential).unwrap();
        assert!(q.abs() < 1e-12);
    }
}
