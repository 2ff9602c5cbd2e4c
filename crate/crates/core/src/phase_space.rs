//! Points of the extended phase space `m = (p, r, t)`.
//!
//! Coordinates are laid out as `p_1..p_d, r_1..r_d, t`, giving `2d + 1` axes
//! for spatial dimension `d ∈ {2, 3}`.

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One phase-space direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    P(usize),
    R(usize),
    T,
}

impl Axis {
    /// Axis for flat index `k` in a space of spatial dimension `dim`.
    pub fn from_index(dim: usize, k: usize) -> Axis {
        if k < dim {
            Axis::P(k)
        } else if k < 2 * dim {
            Axis::R(k - dim)
        } else {
            Axis::T
        }
    }

    pub fn index(self, dim: usize) -> usize {
        match self {
            Axis::P(i) => i,
            Axis::R(i) => dim + i,
            Axis::T => 2 * dim,
        }
    }

    pub fn label(self) -> String {
        match self {
            Axis::P(i) => format!("p{}", i + 1),
            Axis::R(i) => format!("r{}", i + 1),
            Axis::T => "t".to_string(),
        }
    }
}

/// Labels of all `2d + 1` axes in storage order.
pub fn axis_labels(dim: usize) -> Vec<String> {
    (0..2 * dim + 1)
        .map(|k| Axis::from_index(dim, k).label())
        .collect()
}

/// A point `(p, r, t)` of the extended phase space.
#[derive(Clone, Copy, PartialEq)]
pub struct PhasePoint {
    dim: usize,
    p: [f64; 3],
    r: [f64; 3],
    t: f64,
}

impl PhasePoint {
    pub fn new(p: &[f64], r: &[f64], t: f64) -> Result<Self> {
        let dim = p.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidInput(format!(
                "spatial dimension must be 2 or 3, got {dim}"
            )));
        }
        if r.len() != dim {
            return Err(Error::InvalidInput(format!(
                "p has {} components but r has {}",
                dim,
                r.len()
            )));
        }
        if p.iter().chain(r).chain(std::iter::once(&t)).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("phase point has non-finite components".into()));
        }
        let mut pp = [0.0; 3];
        let mut rr = [0.0; 3];
        pp[..dim].copy_from_slice(p);
        rr[..dim].copy_from_slice(r);
        Ok(PhasePoint { dim, p: pp, r: rr, t })
    }

    /// Three-dimensional point from vectors.
    pub fn from_vectors(p: Vector3<f64>, r: Vector3<f64>, t: f64) -> Result<Self> {
        Self::new(p.as_slice(), r.as_slice(), t)
    }

    /// Point from the flat coordinate layout `p_1..p_d, r_1..r_d, t`.
    pub fn from_coords(dim: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != 2 * dim + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates for dimension {dim}, got {}",
                2 * dim + 1,
                coords.len()
            )));
        }
        Self::new(&coords[..dim], &coords[dim..2 * dim], coords[2 * dim])
    }

    /// The origin of a `dim`-dimensional phase space.
    pub fn origin(dim: usize) -> Self {
        let z = [0.0; 3];
        Self::new(&z[..dim], &z[..dim], 0.0).expect("dimension must be 2 or 3")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn axis_count(&self) -> usize {
        2 * self.dim + 1
    }

    pub fn p(&self) -> &[f64] {
        &self.p[..self.dim]
    }

    pub fn r(&self) -> &[f64] {
        &self.r[..self.dim]
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Momentum padded to three components.
    pub fn p3(&self) -> Vector3<f64> {
        Vector3::from(self.p)
    }

    /// Coordinate padded to three components.
    pub fn r3(&self) -> Vector3<f64> {
        Vector3::from(self.r)
    }

    pub fn coord(&self, k: usize) -> f64 {
        match Axis::from_index(self.dim, k) {
            Axis::P(i) => self.p[i],
            Axis::R(i) => self.r[i],
            Axis::T => self.t,
        }
    }

    pub fn set_coord(&mut self, k: usize, value: f64) {
        match Axis::from_index(self.dim, k) {
            Axis::P(i) => self.p[i] = value,
            Axis::R(i) => self.r[i] = value,
            Axis::T => self.t = value,
        }
    }

    /// Copy displaced by `h` along axis `k`.
    pub fn shifted(&self, k: usize, h: f64) -> Self {
        let mut out = *self;
        out.set_coord(k, self.coord(k) + h);
        out
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.axis_count()).map(|k| self.coord(k)).collect()
    }

    /// Euclidean norm over all coordinates.
    pub fn norm(&self) -> f64 {
        (0..self.axis_count())
            .map(|k| self.coord(k).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Finite-difference step scaled to the point: `rel · max(1, |m|)`.
    pub fn scaled_step(&self, rel: f64) -> f64 {
        rel * self.norm().max(1.0)
    }

    pub fn with_p(&self, p: &[f64]) -> Self {
        let mut out = *self;
        out.p[..self.dim].copy_from_slice(&p[..self.dim]);
        out
    }

    pub fn with_r(&self, r: &[f64]) -> Self {
        let mut out = *self;
        out.r[..self.dim].copy_from_slice(&r[..self.dim]);
        out
    }

    pub fn with_t(&self, t: f64) -> Self {
        let mut out = *self;
        out.t = t;
        out
    }
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={:?}, r={:?}, t={})", self.p(), self.r(), self.t)
    }
}

/// Physical constants carried by a model. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub hbar: f64,
    /// Speed of light.
    pub c: f64,
    /// Particle charge.
    pub e: f64,
    /// Zeeman coupling `e / 2mc`.
    pub chi: f64,
    /// Spin-orbit coupling `e / 4m²c²` (or the Rashba constant).
    pub rho: f64,
    /// Effective mass.
    pub m_eff: f64,
    /// Optical wavenumber scale; `1/k0` plays the role of `hbar` for photons.
    pub k0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: 1.0,
            c: 1.0,
            e: 1.0,
            chi: 1.0,
            rho: 1.0,
            m_eff: 1.0,
            k0: 1.0,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.hbar, self.c, self.e, self.chi, self.rho, self.m_eff, self.k0];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("constants must be finite".into()));
        }
        if self.hbar <= 0.0 || self.c <= 0.0 || self.m_eff <= 0.0 || self.k0 <= 0.0 {
            return Err(Error::InvalidInput(
                "hbar, c, m_eff and k0 must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_layout_roundtrips() {
        for dim in [2, 3] {
            for k in 0..2 * dim + 1 {
                assert_eq!(Axis::from_index(dim, k).index(dim), k);
            }
        }
        assert_eq!(axis_labels(2), vec!["p1", "p2", "r1", "r2", "t"]);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(PhasePoint::new(&[1.0], &[1.0], 0.0).is_err());
        assert!(PhasePoint::new(&[1.0, 2.0], &[1.0, 2.0, 3.0], 0.0).is_err());
        assert!(PhasePoint::new(&[f64::NAN, 0.0], &[0.0, 0.0], 0.0).is_err());
        assert!(PhasePoint::new(&[0.0, 0.0], &[0.0, 0.0], f64::INFINITY).is_err());
    }

    #[test]
    fn coords_and_shift() {
        let m = PhasePoint::new(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], 7.0).unwrap();
        assert_eq!(m.coords(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let s = m.shifted(4, 0.5);
        assert_eq!(s.r(), &[4.0, 5.5, 6.0]);
        assert_eq!(PhasePoint::from_coords(3, &s.coords()).unwrap(), s);
    }
}
