//! Spin gauge fields on the extended phase space `m = (p, r, t)`.
//!
//! The crate diagonalizes matrix Hamiltonians, builds exact and adiabatic
//! Berry connections and curvatures, integrates adiabatic semiclassical
//! motion with spin and electromagnetic forces, and packages the Zeeman,
//! spin-orbit, Rashba and optical Magnus models with their closed forms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fd;
pub mod gauge;
pub mod par;
pub mod phase_space;
pub mod spectral;
pub mod scenarios;
pub mod dynamics;
pub mod transport;

pub use error::{Error, Result};
pub use par::Execution;
pub use phase_space::{Axis, Constants, PhasePoint};
