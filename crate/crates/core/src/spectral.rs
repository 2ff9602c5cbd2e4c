//! Matrix Hamiltonians over the extended phase space and their gauge-fixed
//! eigendecompositions.
//!
//! Phase convention at an isolated point: each eigenvector is rotated so that
//! its largest-magnitude component (its *anchor*) is real and positive, ties
//! going to the lowest index. Any other anchor choice is a smooth `U(1)` gauge
//! wherever that component is nonzero; connection code fixes the anchors of a
//! reference frame and reuses them across a finite-difference stencil or path.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::{Constants, PhasePoint};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Hermiticity tolerance applied to every evaluated matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Degeneracy threshold relative to `max(1, ‖H‖_max)`.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Minimum overlap magnitude for band continuation.
pub const TRACKING_MIN_OVERLAP: f64 = 0.5;

/// An `n × n` Hermitian matrix field on the extended phase space.
pub trait HamiltonianModel: Send + Sync {
    fn bands(&self) -> usize;
    /// Spatial dimension `d` of the phase space the model lives on.
    fn dim(&self) -> usize;
    fn constants(&self) -> &Constants;
    fn matrix(&self, m: &PhasePoint) -> CMatrix;
    /// The `H0·I + ħ S·H1` decomposition, when the model has one.
    fn split_form(&self) -> Option<&dyn SplitForm> {
        None
    }
}

/// Representation of the spin operator in the split form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinRep {
    /// Pauli matrices: `n = 2`, eigenvalues `±|H1|`, spin projections `±1/2`.
    Pauli,
    /// Spin-1 matrices: `n = 3`, eigenvalues `-|H1|, 0, |H1|`, projections `-1, 0, 1`.
    SpinOne,
}

impl SpinRep {
    pub fn bands(self) -> usize {
        match self {
            SpinRep::Pauli => 2,
            SpinRep::SpinOne => 3,
        }
    }

    /// Spin projection on `H1` for each band in ascending-energy order (ħ > 0).
    pub fn charges(self) -> Vec<SpinCharge> {
        match self {
            SpinRep::Pauli => vec![SpinCharge(-0.5), SpinCharge(0.5)],
            SpinRep::SpinOne => vec![SpinCharge(-1.0), SpinCharge(0.0), SpinCharge(1.0)],
        }
    }

    /// The three spin matrices `(S_x, S_y, S_z)`; for `Pauli` these are the σ's.
    pub fn matrices(self) -> [CMatrix; 3] {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            SpinRep::Pauli => [
                CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
                CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
                CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
            ],
            SpinRep::SpinOne => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let z = c(0., 0.);
                [
                    CMatrix::from_row_slice(3, 3, &[z, c(s, 0.), z, c(s, 0.), z, c(s, 0.), z, c(s, 0.), z]),
                    CMatrix::from_row_slice(
                        3,
                        3,
                        &[z, c(0., -s), z, c(0., s), z, c(0., -s), z, c(0., s), z],
                    ),
                    CMatrix::from_row_slice(3, 3, &[c(1., 0.), z, z, z, z, z, z, z, c(-1., 0.)]),
                ]
            }
        }
    }
}

/// Spin projection `S` of a band on the vector `H1`; the monopole charge is `-S`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpinCharge(pub f64);

impl SpinCharge {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || (2.0 * s).fract() != 0.0 {
            return Err(Error::InvalidInput(format!(
                "spin projection must be integer or half-integer, got {s}"
            )));
        }
        Ok(SpinCharge(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// The `H0·I + ħ S·H1` shape of a Hamiltonian.
pub trait SplitForm: Send + Sync {
    fn h0(&self, m: &PhasePoint) -> f64;
    fn h1(&self, m: &PhasePoint) -> Vector3<f64>;
    fn spin(&self) -> SpinRep;
}

/// Assemble `h0·I + hbar·(S·h1)`.
pub fn spin_matrix(h0: f64, hbar: f64, h1: &Vector3<f64>, rep: SpinRep) -> CMatrix {
    let n = rep.bands();
    let [sx, sy, sz] = rep.matrices();
    let mut h = CMatrix::identity(n, n) * Complex64::from(h0);
    h += sx * Complex64::from(hbar * h1.x);
    h += sy * Complex64::from(hbar * h1.y);
    h += sz * Complex64::from(hbar * h1.z);
    h
}

/// Split-form model built from closures.
pub struct SpinModel<F0, F1> {
    dim: usize,
    spin: SpinRep,
    constants: Constants,
    h0: F0,
    h1: F1,
}

impl<F0, F1> SpinModel<F0, F1>
where
    F0: Fn(&PhasePoint) -> f64 + Send + Sync,
    F1: Fn(&PhasePoint) -> Vector3<f64> + Send + Sync,
{
    pub fn new(dim: usize, spin: SpinRep, constants: Constants, h0: F0, h1: F1) -> Self {
        SpinModel {
            dim,
            spin,
            constants,
            h0,
            h1,
        }
    }
}

impl<F0, F1> HamiltonianModel for SpinModel<F0, F1>
where
    F0: Fn(&PhasePoint) -> f64 + Send + Sync,
    F1: Fn(&PhasePoint) -> Vector3<f64> + Send + Sync,
{
    fn bands(&self) -> usize {
        self.spin.bands()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn constants(&self) -> &Constants {
        &self.constants
    }
    fn matrix(&self, m: &PhasePoint) -> CMatrix {
        spin_matrix((self.h0)(m), self.constants.hbar, &(self.h1)(m), self.spin)
    }
    fn split_form(&self) -> Option<&dyn SplitForm> {
        Some(self)
    }
}

impl<F0, F1> SplitForm for SpinModel<F0, F1>
where
    F0: Fn(&PhasePoint) -> f64 + Send + Sync,
    F1: Fn(&PhasePoint) -> Vector3<f64> + Send + Sync,
{
    fn h0(&self, m: &PhasePoint) -> f64 {
        (self.h0)(m)
    }
    fn h1(&self, m: &PhasePoint) -> Vector3<f64> {
        (self.h1)(m)
    }
    fn spin(&self) -> SpinRep {
        self.spin
    }
}

/// General `n`-band model from a matrix-valued closure.
pub struct MatrixModel<F> {
    bands: usize,
    dim: usize,
    constants: Constants,
    f: F,
}

impl<F> MatrixModel<F>
where
    F: Fn(&PhasePoint) -> CMatrix + Send + Sync,
{
    pub fn new(bands: usize, dim: usize, f: F) -> Self {
        MatrixModel {
            bands,
            dim,
            constants: Constants::default(),
            f,
        }
    }

    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }
}

impl<F> HamiltonianModel for MatrixModel<F>
where
    F: Fn(&PhasePoint) -> CMatrix + Send + Sync,
{
    fn bands(&self) -> usize {
        self.bands
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn constants(&self) -> &Constants {
        &self.constants
    }
    fn matrix(&self, m: &PhasePoint) -> CMatrix {
        (self.f)(m)
    }
}

fn max_abs(h: &CMatrix) -> f64 {
    h.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Evaluate the model, reject non-finite or non-Hermitian output, and return
/// the exactly symmetrized matrix.
pub fn evaluate(model: &dyn HamiltonianModel, m: &PhasePoint) -> Result<CMatrix> {
    let n = model.bands();
    if n < 2 {
        return Err(Error::InvalidInput(format!("band count must be >= 2, got {n}")));
    }
    if m.dim() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "point has dimension {} but model expects {}",
            m.dim(),
            model.dim()
        )));
    }
    let h = model.matrix(m);
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "model returned {}x{} matrix, expected {n}x{n}",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite Hamiltonian at {m}")));
    }
    let adj = h.adjoint();
    let deviation = (&h - &adj).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if deviation > HERMITIAN_TOL * max_abs(&h).max(1.0) {
        return Err(Error::NonHermitian { deviation });
    }
    Ok((h + adj) * Complex64::from(0.5))
}

/// Sorted eigenvalues and a gauge-fixed unitary of eigenvectors at one point.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    energies: Vec<f64>,
    unitary: CMatrix,
    gap: f64,
    point: PhasePoint,
    anchors: Vec<usize>,
}

impl EigenFrame {
    pub fn bands(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, band: usize) -> f64 {
        self.energies[band]
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// Smallest spacing between adjacent eigenvalues.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn point(&self) -> &PhasePoint {
        &self.point
    }

    /// Index of the component held real-positive in each column.
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn column(&self, band: usize) -> CVector {
        self.unitary.column(band).into_owned()
    }

    /// `⟨self_b | other_c⟩`.
    pub fn overlap(&self, band: usize, other: &EigenFrame, other_band: usize) -> Complex64 {
        self.unitary
            .column(band)
            .iter()
            .zip(other.unitary.column(other_band).iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Distance to the nearest other level for `band`.
    pub fn level_spacing(&self, band: usize) -> f64 {
        self.energies
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != band)
            .map(|(_, e)| (e - self.energies[band]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `max |U†U − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.bands();
        let g = self.unitary.adjoint() * &self.unitary - CMatrix::identity(n, n);
        max_abs(&g)
    }

    /// `max |U†HU − diag(E)|` for the supplied matrix.
    pub fn diagonal_residual(&self, h: &CMatrix) -> f64 {
        let mut d = self.unitary.adjoint() * h * &self.unitary;
        for (k, e) in self.energies.iter().enumerate() {
            d[(k, k)] -= Complex64::from(*e);
        }
        max_abs(&d)
    }

    /// Re-fix phases so that component `anchors[b]` of column `b` is real positive.
    pub fn rephase(&mut self, anchors: &[usize]) -> Result<()> {
        let n = self.bands();
        for (b, &a) in anchors.iter().enumerate().take(n) {
            let z = self.unitary[(a, b)];
            let mag = z.norm();
            if mag < 1e-12 {
                return Err(Error::GaugePatch(format!(
                    "anchor component {a} of band {b} vanishes at {}",
                    self.point
                )));
            }
            let phase = z.conj() / mag;
            for i in 0..n {
                self.unitary[(i, b)] *= phase;
            }
            self.unitary[(a, b)] = Complex64::new(self.unitary[(a, b)].re, 0.0);
        }
        self.anchors = anchors.to_vec();
        Ok(())
    }

    /// Reorder columns so that column `k` continues `reference` column `k`.
    ///
    /// Fails with `BandTracking` when a best overlap drops below 0.5 or two
    /// reference bands claim the same column.
    pub fn match_bands(&mut self, reference: &EigenFrame, index: usize) -> Result<()> {
        let n = self.bands();
        let mut perm = Vec::with_capacity(n);
        for k in 0..n {
            let (best, mag) = (0..n)
                .map(|j| (j, reference.overlap(k, self, j).norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag < TRACKING_MIN_OVERLAP || perm.contains(&best) {
                return Err(Error::BandTracking {
                    index,
                    overlap: mag,
                });
            }
            perm.push(best);
        }
        if perm.iter().enumerate().all(|(k, j)| k == *j) {
            return Ok(());
        }
        let old_u = self.unitary.clone();
        let old_e = self.energies.clone();
        let old_a = self.anchors.clone();
        for (k, &j) in perm.iter().enumerate() {
            self.unitary.set_column(k, &old_u.column(j));
            self.energies[k] = old_e[j];
            self.anchors[k] = old_a[j];
        }
        Ok(())
    }
}

fn largest_component(u: &CMatrix, b: usize) -> usize {
    let mags: Vec<f64> = u.column(b).iter().map(|z| z.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    mags.iter()
        .position(|&x| x >= max * (1.0 - 1e-12))
        .unwrap_or(0)
}

/// Diagonalize an already-validated Hermitian matrix.
pub fn diagonalize_matrix(h: CMatrix, point: PhasePoint) -> Result<EigenFrame> {
    let n = h.nrows();
    let scale = max_abs(&h).max(1.0);
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical(format!("no convergence at {point}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut unitary = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        unitary.set_column(col, &eig.eigenvectors.column(k));
    }
    let gap = energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let tolerance = DEGENERACY_TOL * scale;
    if gap < tolerance {
        return Err(Error::Degeneracy {
            gap,
            tolerance,
            point: point.to_string(),
        });
    }
    let anchors: Vec<usize> = (0..n).map(|b| largest_component(&unitary, b)).collect();
    let mut frame = EigenFrame {
        energies,
        unitary,
        gap,
        point,
        anchors: vec![0; n],
    };
    frame.rephase(&anchors)?;
    Ok(frame)
}

/// Eigendecomposition at `m` with the largest-component phase convention.
pub fn diagonalize(model: &dyn HamiltonianModel, m: &PhasePoint) -> Result<EigenFrame> {
    let h = evaluate(model, m)?;
    diagonalize_matrix(h, *m)
}

/// Eigendecomposition at `m` continued from `reference`: bands matched by
/// overlap and phases fixed on the reference anchors.
pub fn diagonalize_like(
    model: &dyn HamiltonianModel,
    m: &PhasePoint,
    reference: &EigenFrame,
) -> Result<EigenFrame> {
    let mut frame = diagonalize(model, m)?;
    frame.match_bands(reference, 0)?;
    frame.rephase(reference.anchors())?;
    Ok(frame)
}

/// Parallel-transported frames along a path.
///
/// Each column has a real non-negative overlap with the same column of the
/// previous frame, and band labels follow overlap continuity rather than the
/// energy sort.
pub fn smooth_frame_along(
    model: &dyn HamiltonianModel,
    path: &[PhasePoint],
) -> Result<Vec<EigenFrame>> {
    let mut frames: Vec<EigenFrame> = Vec::with_capacity(path.len());
    for (index, m) in path.iter().enumerate() {
        let mut frame = diagonalize(model, m)?;
        if let Some(prev) = frames.last() {
            frame.match_bands(prev, index)?;
            for b in 0..frame.bands() {
                let ov = prev.overlap(b, &frame, b);
                let phase = ov.conj() / ov.norm();
                for i in 0..frame.bands() {
                    frame.unitary[(i, b)] *= phase;
                }
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_matrix_is_identity_frame() {
        let model = MatrixModel::new(2, 2, |_m: &PhasePoint| {
            CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(2.0)])
        });
        let f = diagonalize(&model, &PhasePoint::origin(2)).unwrap();
        assert_eq!(f.energies(), &[1.0, 2.0]);
        assert!((f.unitary() - CMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-14));
        assert_eq!(f.gap(), 1.0);
    }

    #[test]
    fn sigma_x_eigenvectors() {
        let model = MatrixModel::new(2, 3, |_m: &PhasePoint| SpinRep::Pauli.matrices()[0].clone());
        let f = diagonalize(&model, &PhasePoint::origin(3)).unwrap();
        assert!((f.energy(0) + 1.0).abs() < 1e-14 && (f.energy(1) - 1.0).abs() < 1e-14);
        // lower state ∝ (1, -1), upper ∝ (1, 1); ties anchor at index 0
        let lo = f.column(0);
        let hi = f.column(1);
        assert!((lo[0] - c(FRAC_1_SQRT_2)).norm() < 1e-14);
        assert!((lo[1] + c(FRAC_1_SQRT_2)).norm() < 1e-14);
        assert!((hi[0] - c(FRAC_1_SQRT_2)).norm() < 1e-14);
        assert!((hi[1] - c(FRAC_1_SQRT_2)).norm() < 1e-14);
    }

    #[test]
    fn degeneracy_is_reported() {
        let model = MatrixModel::new(2, 2, |_m: &PhasePoint| CMatrix::identity(2, 2));
        match diagonalize(&model, &PhasePoint::origin(2)) {
            Err(Error::Degeneracy { .. }) => {}
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let model = MatrixModel::new(2, 2, |_m: &PhasePoint| {
            CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.0), c(2.0)])
        });
        assert!(matches!(
            diagonalize(&model, &PhasePoint::origin(2)),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn split_form_matches_matrix() {
        let model = SpinModel::new(
            3,
            SpinRep::Pauli,
            Constants::default(),
            |m: &PhasePoint| m.p3().norm_squared() / 2.0,
            |m: &PhasePoint| m.r3(),
        );
        let m = PhasePoint::new(&[0.1, 0.2, 0.3], &[0.4, -0.5, 0.6], 0.0).unwrap();
        let h = model.matrix(&m);
        let h1 = model.h1(&m);
        let h0 = model.h0(&m);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(h0 + h1.z),
                Complex64::new(h1.x, -h1.y),
                Complex64::new(h1.x, h1.y),
                c(h0 - h1.z),
            ],
        );
        assert!((h - expected).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn spin_one_spectrum() {
        let h1 = Vector3::new(0.3, -0.4, 1.2);
        let h = spin_matrix(0.0, 1.0, &h1, SpinRep::SpinOne);
        let f = diagonalize_matrix(h, PhasePoint::origin(3)).unwrap();
        let n = h1.norm();
        assert!((f.energy(0) + n).abs() < 1e-13);
        assert!(f.energy(1).abs() < 1e-13);
        assert!((f.energy(2) - n).abs() < 1e-13);
    }
}
