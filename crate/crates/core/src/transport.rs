//! Ensembles of trajectories over a pair of spin bands and their transverse
//! transport observables.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::em::ExternalEMField;
use crate::dynamics::integrator::{integrate, IntegratorConfig, Status, Trajectory};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Execution};
use crate::phase_space::PhasePoint;
use crate::spectral::HamiltonianModel;

/// Initial conditions over boxes in `p` and `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampler {
    /// Tensor grid with `points_per_axis` nodes on every axis whose range is
    /// not degenerate.
    Grid {
        p_min: Vec<f64>,
        p_max: Vec<f64>,
        r_min: Vec<f64>,
        r_max: Vec<f64>,
        points_per_axis: usize,
    },
    /// Uniform draws; sample `i` uses stream `i` of a ChaCha8 generator so
    /// the set does not depend on scheduling.
    Random {
        p_min: Vec<f64>,
        p_max: Vec<f64>,
        r_min: Vec<f64>,
        r_max: Vec<f64>,
        count: usize,
    },
}

impl Sampler {
    fn ranges(&self) -> (Vec<f64>, Vec<f64>) {
        let (p_min, p_max, r_min, r_max) = match self {
            Sampler::Grid { p_min, p_max, r_min, r_max, .. } | Sampler::Random { p_min, p_max, r_min, r_max, .. } => {
                (p_min, p_max, r_min, r_max)
            }
        };
        let mut lo = p_min.clone();
        lo.extend(r_min);
        let mut hi = p_max.clone();
        hi.extend(r_max);
        (lo, hi)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let (lo, hi) = self.ranges();
        let (p_len, r_len) = match self {
            Sampler::Grid { p_min, p_max, r_min, r_max, .. } | Sampler::Random { p_min, p_max, r_min, r_max, .. } => {
                ((p_min.len(), p_max.len()), (r_min.len(), r_max.len()))
            }
        };
        if p_len != (dim, dim) || r_len != (dim, dim) {
            return Err(Error::InvalidInput(format!("sampler ranges must have {dim} components each")));
        }
        if lo.iter().chain(&hi).any(|x| !x.is_finite()) || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidInput("sampler ranges must be finite with min <= max".into()));
        }
        match self {
            Sampler::Grid { points_per_axis: 0, .. } | Sampler::Random { count: 0, .. } => {
                Err(Error::InvalidInput("sampler must produce at least one sample".into()))
            }
            _ => Ok(()),
        }
    }

    /// Initial phase-space points at time `t0`.
    pub fn points(&self, dim: usize, t0: f64, seed: u64) -> Result<Vec<PhasePoint>> {
        self.validate(dim)?;
        let (lo, hi) = self.ranges();
        let coords: Vec<Vec<f64>> = match self {
            Sampler::Grid { points_per_axis, .. } => {
                let nodes: Vec<Vec<f64>> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&a, &b)| {
                        if a == b || *points_per_axis == 1 {
                            vec![0.5 * (a + b)]
                        } else {
                            let n = *points_per_axis;
                            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                        }
                    })
                    .collect();
                let total: usize = nodes.iter().map(Vec::len).product();
                (0..total)
                    .map(|mut idx| {
                        let mut c = vec![0.0; nodes.len()];
                        for k in (0..nodes.len()).rev() {
                            c[k] = nodes[k][idx % nodes[k].len()];
                            idx /= nodes[k].len();
                        }
                        c
                    })
                    .collect()
            }
            Sampler::Random { count, .. } => (0..*count)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    lo.iter()
                        .zip(&hi)
                        .map(|(&a, &b)| if a == b { a } else { rng.random_range(a..b) })
                        .collect()
                })
                .collect(),
        };
        coords
            .into_iter()
            .map(|mut c| {
                c.push(t0);
                PhasePoint::from_coords(dim, &c)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub sampler: Sampler,
    pub seed: u64,
    pub t0: f64,
    pub config: IntegratorConfig,
    /// The two bands compared; the spin current is `½(v̄[1] − v̄[0])`.
    pub bands: [usize; 2],
    /// Declared transverse direction.
    pub transverse: Vector3<f64>,
}

/// Outcome of one trajectory projected on the transverse axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleResult {
    pub sample: usize,
    pub band: usize,
    pub displacement: f64,
    /// Transverse velocity at the initial point.
    pub initial_velocity: f64,
    /// `displacement/elapsed`, or the initial velocity for zero duration.
    pub mean_velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub sample: usize,
    pub band: usize,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStats {
    pub band: usize,
    pub count: usize,
    pub mean_displacement: f64,
    pub displacement_se: f64,
    pub mean_velocity: f64,
    pub velocity_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub bands: [BandStats; 2],
    pub spin_current: f64,
    pub spin_current_se: f64,
    pub splitting: f64,
    pub splitting_se: f64,
    pub total_samples: usize,
    /// Samples where both bands succeeded, in sample order.
    pub samples: Vec<[SampleResult; 2]>,
    pub failures: Vec<Failure>,
}

pub const MAX_FAILURE_FRACTION: f64 = 0.1;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn project(traj: &Trajectory, axis: &Vector3<f64>, sample: usize) -> SampleResult {
    let first = &traj.states[0];
    let last = traj.last();
    let pad = |v: &[f64]| {
        let mut out = Vector3::zeros();
        out.as_mut_slice()[..v.len()].copy_from_slice(v);
        out
    };
    let displacement = (last.m.r3() - first.m.r3()).dot(axis);
    let initial_velocity = pad(&first.r_dot).dot(axis);
    let elapsed = last.m.t() - first.m.t();
    SampleResult {
        sample,
        band: traj.band,
        displacement,
        initial_velocity,
        mean_velocity: if elapsed > 0.0 { displacement / elapsed } else { initial_velocity },
    }
}

/// Integrate every sample on both bands and aggregate transverse
/// observables. Results are independent of the execution mode.
pub fn run_ensemble(
    model: &dyn HamiltonianModel,
    em: Option<&ExternalEMField>,
    spec: &EnsembleSpec,
    exec: Execution,
) -> Result<TransportReport> {
    spec.config.validate()?;
    for b in spec.bands {
        if b >= model.bands() {
            return Err(Error::InvalidInput(format!("band {b} out of range")));
        }
    }
    let an = spec.transverse.norm();
    if !(an > 0.0 && an.is_finite()) {
        return Err(Error::InvalidInput("transverse axis must be a nonzero vector".into()));
    }
    let axis = spec.transverse / an;
    let points = spec.sampler.points(model.dim(), spec.t0, spec.seed)?;
    let n = points.len();
    let runs = exec.map(2 * n, |job| {
        let (sample, slot) = (job / 2, job % 2);
        let band = spec.bands[slot];
        match integrate(model, band, &points[sample], &spec.config, em) {
            Ok(traj) => match traj.status {
                Status::Completed => Ok(project(&traj, &axis, sample)),
                Status::AdiabaticityBreach => Err(("AdiabaticityBreach", format!("epsilon exceeded at t = {}", traj.last().m.t()))),
                Status::MaxSteps => Err(("MaxSteps", "max_steps reached".to_string())),
            },
            Err(e) => Err((e.kind(), e.to_string())),
        }
    });

    let mut failures = Vec::new();
    let mut samples = Vec::with_capacity(n);
    let mut failed_samples = 0usize;
    for (sample, pair) in runs.chunks(2).enumerate() {
        let mut ok = true;
        for (slot, r) in pair.iter().enumerate() {
            if let Err((kind, message)) = r {
                ok = false;
                failures.push(Failure { sample, band: spec.bands[slot], kind: kind.to_string(), message: message.clone() });
            }
        }
        match (ok, &pair[0], &pair[1]) {
            (true, Ok(a), Ok(b)) => samples.push([*a, *b]),
            _ => failed_samples += 1,
        }
    }
    if failed_samples as f64 > MAX_FAILURE_FRACTION * n as f64 || samples.is_empty() {
        return Err(Error::EnsembleFailed { failed: failed_samples, total: n });
    }

    let column = |slot: usize, f: fn(&SampleResult) -> f64| -> Vec<f64> { samples.iter().map(|s| f(&s[slot])).collect() };
    let stats = |slot: usize| {
        let (md, sd) = mean_se(&column(slot, |s| s.displacement));
        let (mv, sv) = mean_se(&column(slot, |s| s.mean_velocity));
        BandStats {
            band: spec.bands[slot],
            count: samples.len(),
            mean_displacement: md,
            displacement_se: sd,
            mean_velocity: mv,
            velocity_se: sv,
        }
    };
    let bands = [stats(0), stats(1)];
    let dv: Vec<f64> = samples.iter().map(|s| 0.5 * (s[1].mean_velocity - s[0].mean_velocity)).collect();
    let dd: Vec<f64> = samples.iter().map(|s| s[1].displacement - s[0].displacement).collect();
    let (spin_current, spin_current_se) = mean_se(&dv);
    let (splitting, splitting_se) = mean_se(&dd);
    Ok(TransportReport {
        bands,
        spin_current,
        spin_current_se,
        splitting,
        splitting_se,
        total_samples: n,
        samples,
        failures,
    })
}

/// Charge-current proxy `f0·v̄0 + f1·v̄1` for band populations `fractions`.
pub fn polarization_current(report: &TransportReport, fractions: [f64; 2]) -> Result<f64> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions[0] + fractions[1] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "polarization fractions must lie in [0, 1] and sum to 1, got {fractions:?}"
        )));
    }
    Ok(fractions[0] * report.bands[0].mean_velocity + fractions[1] * report.bands[1].mean_velocity)
}
