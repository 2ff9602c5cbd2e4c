//! Curvature maps over rectangular phase-space grids.

use crate::error::{Error, Result};
use crate::gauge::curvature::{adiabatic_curvature_numeric_with, curvature_m_space, CurvatureTensor, PlaquetteOptions};
use crate::par::Execution;
use crate::phase_space::PhasePoint;
use crate::spectral::HamiltonianModel;

/// One swept axis: `count` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// Row-major product grid around a base point; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub base: PhasePoint,
    pub axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(base: PhasePoint, axes: Vec<GridAxis>) -> Result<Self> {
        for a in &axes {
            if a.axis >= base.axis_count() || a.count == 0 || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::InvalidInput(format!("bad grid axis {a:?}")));
            }
        }
        Ok(Grid { base, axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> PhasePoint {
        let mut p = self.base;
        for a in self.axes.iter().rev() {
            p.set_coord(a.axis, a.value(index % a.count));
            index /= a.count;
        }
        p
    }

    pub fn points(&self) -> Vec<PhasePoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureMethod {
    Plaquette(PlaquetteOptions),
    /// Monopole pullback along `H1`; `None` uses the default Jacobian step.
    SplitForm(Option<f64>),
}

pub fn curvature_at(model: &dyn HamiltonianModel, m: &PhasePoint, method: &CurvatureMethod) -> Result<CurvatureTensor> {
    match method {
        CurvatureMethod::Plaquette(o) => adiabatic_curvature_numeric_with(model, m, o),
        CurvatureMethod::SplitForm(step) => curvature_m_space(model, m, *step),
    }
}

/// Curvature at every grid point, in grid order.
pub fn curvature_map(
    model: &dyn HamiltonianModel,
    grid: &Grid,
    method: &CurvatureMethod,
    exec: Execution,
) -> Vec<(PhasePoint, Result<CurvatureTensor>)> {
    exec.map(grid.len(), |i| {
        let p = grid.point(i);
        (p, curvature_at(model, &p, method))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumerates_last_axis_fastest() {
        let g = Grid::new(
            PhasePoint::origin(2),
            vec![
                GridAxis { axis: 2, lo: 0.0, hi: 1.0, count: 2 },
                GridAxis { axis: 3, lo: -1.0, hi: 1.0, count: 3 },
            ],
        )
        .unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(1).r(), &[0.0, 0.0]);
        assert_eq!(g.point(5).r(), &[1.0, 1.0]);
    }
}
