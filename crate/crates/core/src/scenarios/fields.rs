//! External vector fields `F(r, t)` with analytic derivatives.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth 3-vector field over `(r, t)`.
pub trait VectorField: Send + Sync {
    fn value(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64>;
    /// `J[(i, j)] = ∂F_i/∂r_j`.
    fn jacobian(&self, r: &Vector3<f64>, t: f64) -> Matrix3<f64>;
    /// `∂F/∂t`.
    fn rate(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64>;
}

/// `F = offset + G·r + rate·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearField {
    #[serde(default)]
    pub offset: [f64; 3],
    /// Row-major `G[i][j] = ∂F_i/∂r_j`.
    #[serde(default)]
    pub gradient: [[f64; 3]; 3],
    #[serde(default)]
    pub rate: [f64; 3],
}

impl LinearField {
    pub fn uniform(v: Vector3<f64>) -> Self {
        LinearField {
            offset: v.into(),
            gradient: [[0.0; 3]; 3],
            rate: [0.0; 3],
        }
    }

    /// `F(r) = r`, the identity map used to work directly in field space.
    pub fn identity() -> Self {
        LinearField {
            offset: [0.0; 3],
            gradient: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            rate: [0.0; 3],
        }
    }

    pub fn ramp(offset: Vector3<f64>, rate: Vector3<f64>) -> Self {
        LinearField {
            offset: offset.into(),
            gradient: [[0.0; 3]; 3],
            rate: rate.into(),
        }
    }

    fn g(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.gradient[i][j])
    }
}

impl VectorField for LinearField {
    fn value(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64> {
        Vector3::from(self.offset) + self.g() * r + Vector3::from(self.rate) * t
    }
    fn jacobian(&self, _r: &Vector3<f64>, _t: f64) -> Matrix3<f64> {
        self.g()
    }
    fn rate(&self, _r: &Vector3<f64>, _t: f64) -> Vector3<f64> {
        Vector3::from(self.rate)
    }
}

/// One Fourier mode `amplitude · sin(k·r + ω t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub amplitude: [f64; 3],
    pub wavevector: [f64; 3],
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Offset plus a finite sum of smooth sinusoidal modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothRandomField {
    pub offset: [f64; 3],
    pub modes: Vec<Mode>,
}

impl SmoothRandomField {
    /// Draw `count` modes with amplitudes in `[-amplitude, amplitude]`,
    /// wavevector components in `[-wavenumber, wavenumber]` and frequencies in
    /// `[-frequency, frequency]`.
    pub fn sample(seed: u64, offset: Vector3<f64>, count: usize, amplitude: f64, wavenumber: f64, frequency: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sym = |s: f64| if s == 0.0 { 0.0 } else { rng.random_range(-s..=s) };
        let modes = (0..count)
            .map(|_| Mode {
                amplitude: [sym(amplitude), sym(amplitude), sym(amplitude)],
                wavevector: [sym(wavenumber), sym(wavenumber), sym(wavenumber)],
                frequency: sym(frequency),
                phase: sym(std::f64::consts::PI),
            })
            .collect();
        SmoothRandomField {
            offset: offset.into(),
            modes,
        }
    }

    /// Upper bound of `|F − offset|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.modes.iter().map(|m| Vector3::from(m.amplitude).norm()).sum()
    }
}

impl VectorField for SmoothRandomField {
    fn value(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64> {
        self.modes.iter().fold(Vector3::from(self.offset), |acc, m| {
            let arg = Vector3::from(m.wavevector).dot(r) + m.frequency * t + m.phase;
            acc + Vector3::from(m.amplitude) * arg.sin()
        })
    }
    fn jacobian(&self, r: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        self.modes.iter().fold(Matrix3::zeros(), |acc, m| {
            let k = Vector3::from(m.wavevector);
            let arg = k.dot(r) + m.frequency * t + m.phase;
            acc + Vector3::from(m.amplitude) * k.transpose() * arg.cos()
        })
    }
    fn rate(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64> {
        self.modes.iter().fold(Vector3::zeros(), |acc, m| {
            let arg = Vector3::from(m.wavevector).dot(r) + m.frequency * t + m.phase;
            acc + Vector3::from(m.amplitude) * (m.frequency * arg.cos())
        })
    }
}

/// Serializable field description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    Linear(LinearField),
    Modes(SmoothRandomField),
}

impl Field {
    pub fn uniform(v: Vector3<f64>) -> Self {
        Field::Linear(LinearField::uniform(v))
    }

    pub fn zero() -> Self {
        Field::uniform(Vector3::zeros())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            Field::Linear(l) => l
                .offset
                .iter()
                .chain(l.gradient.iter().flatten())
                .chain(l.rate.iter())
                .all(|x| x.is_finite()),
            Field::Modes(m) => m.offset.iter().all(|x| x.is_finite())
                && m.modes.iter().all(|md| {
                    md.amplitude
                        .iter()
                        .chain(md.wavevector.iter())
                        .chain([md.frequency, md.phase].iter())
                        .all(|x| x.is_finite())
                }),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidInput("field parameters must be finite".into()))
        }
    }

    /// True when the field has no time dependence.
    pub fn is_static(&self) -> bool {
        match self {
            Field::Linear(l) => l.rate == [0.0; 3],
            Field::Modes(m) => m.modes.iter().all(|md| md.frequency == 0.0),
        }
    }

    /// True when the field is the same at every point.
    pub fn is_uniform(&self) -> bool {
        match self {
            Field::Linear(l) => l.gradient == [[0.0; 3]; 3],
            Field::Modes(m) => m.modes.iter().all(|md| md.wavevector == [0.0; 3]),
        }
    }
}

impl VectorField for Field {
    fn value(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64> {
        match self {
            Field::Linear(f) => f.value(r, t),
            Field::Modes(f) => f.value(r, t),
        }
    }
    fn jacobian(&self, r: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        match self {
            Field::Linear(f) => f.jacobian(r, t),
            Field::Modes(f) => f.jacobian(r, t),
        }
    }
    fn rate(&self, r: &Vector3<f64>, t: f64) -> Vector3<f64> {
        match self {
            Field::Linear(f) => f.rate(r, t),
            Field::Modes(f) => f.rate(r, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::central4;

    #[test]
    fn mode_derivatives_match_differences() {
        let f = SmoothRandomField::sample(7, Vector3::new(0.0, 0.0, 1.0), 4, 0.3, 1.2, 0.8);
        let r = Vector3::new(0.2, -0.4, 0.9);
        let t = 0.35;
        let j = f.jacobian(&r, t);
        for i in 0..3 {
            for k in 0..3 {
                let d = central4(
                    |x| {
                        let mut rr = r;
                        rr[k] = x;
                        f.value(&rr, t)[i]
                    },
                    r[k],
                    1e-3,
                );
                assert!((d - j[(i, k)]).abs() < 1e-10);
            }
            let dt = central4(|s| f.value(&r, s)[i], t, 1e-3);
            assert!((dt - f.rate(&r, t)[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let a = SmoothRandomField::sample(3, Vector3::zeros(), 3, 1.0, 1.0, 1.0);
        let b = SmoothRandomField::sample(3, Vector3::zeros(), 3, 1.0, 1.0, 1.0);
        assert_eq!(a, b);
    }
}
