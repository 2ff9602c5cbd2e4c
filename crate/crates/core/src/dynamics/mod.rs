//! Adiabatic semiclassical dynamics.

pub mod adiabaticity;
pub mod contour;
pub mod em;
pub mod integrator;
pub mod velocity;

pub use adiabaticity::{adiabaticity_epsilon, DeltaP, Epsilon};
pub use contour::{displacement_contour, momentum_monopole};
pub use em::{effective_em_fields, ExternalEMField};
pub use integrator::{integrate, IntegratorConfig, Method, Status, Trajectory, TrajectoryState};
pub use velocity::{energy_gradient, velocity_field, Coupling, CurvatureSource, Velocity, VelocityOptions};
