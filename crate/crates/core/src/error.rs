use thiserror::Error;

/// Errors raised by the spectral, gauge, dynamics and transport layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate spectrum: gap {gap:.3e} below tolerance {tolerance:.3e} at {point}")]
    Degeneracy {
        gap: f64,
        tolerance: f64,
        point: String,
    },

    #[error("eigensolver did not converge: {0}")]
    Numerical(String),

    #[error("band tracking lost: overlap {overlap:.3e} below 0.5 at path index {index}")]
    BandTracking { index: usize, overlap: f64 },

    #[error("finite-difference step must be positive, got {0}")]
    Step(f64),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("gauge patch: {0}")]
    GaugePatch(String),

    #[error("flux quadrature mismatch: radius {inner_radius} gives {inner}, radius {outer_radius} gives {outer}")]
    Quadrature {
        inner_radius: f64,
        outer_radius: f64,
        inner: f64,
        outer: f64,
    },

    #[error("velocity system is singular (spin-gauge terms are not perturbative), det = {det:.3e}")]
    SingularSystem { det: f64 },

    #[error("matrix is not Hermitian: deviation {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trajectory failed at step {step}: {source}")]
    Trajectory { step: usize, source: Box<Error> },

    #[error("ensemble failed: {failed} of {total} trajectories errored")]
    EnsembleFailed { failed: usize, total: usize },
}

impl Error {
    /// True for errors caused by the physics of the configuration (degeneracies,
    /// singular points, lost adiabatic tracking) rather than malformed input.
    pub fn is_physical(&self) -> bool {
        match self {
            Error::Degeneracy { .. }
            | Error::BandTracking { .. }
            | Error::Singularity(_)
            | Error::GaugePatch(_)
            | Error::Quadrature { .. }
            | Error::SingularSystem { .. } => true,
            Error::Trajectory { source, .. } => source.is_physical(),
            Error::EnsembleFailed { .. } => true,
            _ => false,
        }
    }

    /// Short machine-readable tag used in structured error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Degeneracy { .. } => "DegeneracyError",
            Error::Numerical(_) => "NumericalError",
            Error::BandTracking { .. } => "BandTrackingError",
            Error::Step(_) => "StepError",
            Error::Singularity(_) => "SingularityError",
            Error::GaugePatch(_) => "GaugePatchError",
            Error::Quadrature { .. } => "QuadratureError",
            Error::SingularSystem { .. } => "SingularSystemError",
            Error::NonHermitian { .. } => "NonHermitianError",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Trajectory { source, .. } => source.kind(),
            Error::EnsembleFailed { .. } => "EnsembleFailed",
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Error {
        match self {
            e @ Error::Trajectory { .. } => e,
            e => Error::Trajectory {
                step,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
