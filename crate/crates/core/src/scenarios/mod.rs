//! Worked models with closed-form gauge data.

pub mod fields;
pub mod optical;
pub mod rashba;
pub mod spin_orbit;
pub mod zeeman;

pub use fields::{Field, LinearField, SmoothRandomField, VectorField};
pub use optical::{magnus_ray, IndexProfile, OpticalScenario, Ray};
pub use rashba::{rashba_motion, RashbaMotion, RashbaScenario};
pub use spin_orbit::SpinOrbitScenario;
pub use zeeman::ZeemanScenario;
