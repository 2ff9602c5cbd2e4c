//! Spin gauge potentials, curvatures, phases and topological diagnostics.

pub mod connection;
pub mod curvature;
pub mod grid;
pub mod phase;
pub mod topology;

pub use connection::{
    adiabatic_connection, exact_connection, nonabelian_curvature, Connection, ConnectionKind, NonAbelianCurvature,
};
pub use curvature::{
    adiabatic_curvature_numeric, adiabatic_curvature_numeric_with, curvature_m_space, monopole_curvature, pullback,
    pullback_curvature, Block, CurvatureTensor, PlaquetteOptions,
};
pub use grid::{curvature_map, CurvatureMethod, Grid, GridAxis};
pub use phase::{
    curvature_from_connection, dirac_phase, phase_line_integral, regauge, ConnectionField, LinePhase,
    ModelConnectionField, Regauged,
};
pub use topology::{chern_charge, maxwell_residuals, MaxwellResiduals, SphereQuadrature};
