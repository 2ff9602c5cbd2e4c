//! Fixed-step RK4 and adaptive Runge–Kutta–Fehlberg 4(5) integration of the
//! adiabatic motion equations with phase and ε bookkeeping.

use crate::error::{Error, Result};
use crate::gauge::connection::band_connection;
use crate::gauge::phase::DEFAULT_CONNECTION_REL_STEP;
use crate::phase_space::PhasePoint;
use crate::spectral::{EigenFrame, HamiltonianModel};

use super::adiabaticity::{delta_p_at, epsilon_from_parts, DeltaP};
use super::em::ExternalEMField;
use super::velocity::{velocity_field, Velocity, VelocityOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub step: f64,
    /// Local error tolerance for RKF45.
    pub tolerance: f64,
    pub duration: f64,
    pub max_steps: usize,
    /// Integration stops with `AdiabaticityBreach` once ε exceeds this.
    pub epsilon_abort: f64,
    /// Momentum scale rule for ε.
    pub delta_p: DeltaP,
    pub velocity: VelocityOptions,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step: 1e-3,
            tolerance: 1e-9,
            duration: 1.0,
            max_steps: 1_000_000,
            epsilon_abort: 1.0,
            delta_p: DeltaP::Gap,
            velocity: VelocityOptions::default(),
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.step > 0.0 && self.step.is_finite()) {
            bad.push(format!("step must be positive, got {}", self.step));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            bad.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            bad.push(format!("duration must be >= 0, got {}", self.duration));
        }
        if self.max_steps == 0 {
            bad.push("max_steps must be at least 1".into());
        }
        if !(self.epsilon_abort > 0.0 && self.epsilon_abort <= 1.0) {
            bad.push(format!("epsilon_abort must lie in (0, 1], got {}", self.epsilon_abort));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(bad.join("; ")))
        }
    }
}

/// One stored point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub m: PhasePoint,
    pub band: usize,
    pub energy: f64,
    pub epsilon: f64,
    pub berry_phase: f64,
    pub dynamic_phase: f64,
    /// Adiabatic connection of the band over all axes, in the gauge used for
    /// `berry_phase` at this state.
    pub connection: Vec<f64>,
    /// `P = p + ħA_r`.
    pub generalized_p: Vec<f64>,
    /// `R = r − ħA_p`.
    pub generalized_r: Vec<f64>,
    pub p_dot: Vec<f64>,
    pub r_dot: Vec<f64>,
    pub spin_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    MaxSteps,
    AdiabaticityBreach,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub band: usize,
    pub states: Vec<TrajectoryState>,
    pub status: Status,
    /// Largest spin-force ratio seen; above 0.1 the spin terms are not small.
    pub max_spin_ratio: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryState {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn spin_warning(&self) -> bool {
        self.max_spin_ratio > SPIN_RATIO_WARN
    }
}

pub const SPIN_RATIO_WARN: f64 = 0.1;
const ANCHOR_SWITCH: f64 = 0.3;

struct Gauge {
    anchor: usize,
}

fn best_anchor(frame: &EigenFrame, band: usize) -> (usize, f64) {
    let u = frame.column(band);
    let mut best = (0, 0.0);
    for (i, z) in u.iter().enumerate() {
        if z.norm() > best.1 * (1.0 + 1e-12) {
            best = (i, z.norm());
        }
    }
    best
}

struct Context<'a> {
    model: &'a dyn HamiltonianModel,
    band: usize,
    em: Option<&'a ExternalEMField>,
    config: &'a IntegratorConfig,
    dim: usize,
}

impl Context<'_> {
    fn point(&self, y: &[f64], t: f64) -> Result<PhasePoint> {
        let mut c = y.to_vec();
        c.push(t);
        PhasePoint::from_coords(self.dim, &c)
    }

    fn rhs(&self, y: &[f64], t: f64) -> Result<(Velocity, Vec<f64>)> {
        let m = self.point(y, t)?;
        let v = velocity_field(self.model, self.band, &m, self.em, &self.config.velocity)?;
        let mut dy = v.p_dot.clone();
        dy.extend_from_slice(&v.r_dot);
        Ok((v, dy))
    }

    fn connection(&self, m: &PhasePoint, anchor: usize) -> Result<(Vec<f64>, EigenFrame)> {
        band_connection(self.model, m, self.band, anchor, m.scaled_step(DEFAULT_CONNECTION_REL_STEP))
    }

    fn epsilon(&self, m: &PhasePoint, v: &Velocity) -> Result<f64> {
        let dp = delta_p_at(self.model, m, v.spacing, &v.grad_p, &self.config.delta_p)?;
        let e = epsilon_from_parts(self.model.constants().hbar, v.spacing, v.grad_t, &v.p_dot, &v.r_dot, dp)?;
        Ok(e.value)
    }

    fn state(&self, m: PhasePoint, v: &Velocity, a: Vec<f64>, berry: f64, dynamic: f64) -> Result<TrajectoryState> {
        let hbar = self.model.constants().hbar;
        let d = self.dim;
        let generalized_p = (0..d).map(|i| m.p()[i] + hbar * a[d + i]).collect();
        let generalized_r = (0..d).map(|i| m.r()[i] - hbar * a[i]).collect();
        Ok(TrajectoryState {
            m,
            band: self.band,
            energy: v.energy,
            epsilon: self.epsilon(&m, v)?,
            berry_phase: berry,
            dynamic_phase: dynamic,
            connection: a,
            generalized_p,
            generalized_r,
            p_dot: v.p_dot.clone(),
            r_dot: v.r_dot.clone(),
            spin_ratio: v.spin_ratio,
        })
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

/// RK4 step from `(y, t)` given `k1 = f(y, t)`.
fn rk4_step(ctx: &Context, y: &[f64], t: f64, k1: &[f64], h: f64) -> Result<Vec<f64>> {
    let k2 = ctx.rhs(&axpy(y, h, &[(0.5, k1)]), t + 0.5 * h)?.1;
    let k3 = ctx.rhs(&axpy(y, h, &[(0.5, &k2)]), t + 0.5 * h)?.1;
    let k4 = ctx.rhs(&axpy(y, h, &[(1.0, &k3)]), t + h)?.1;
    Ok(axpy(y, h, &[(1.0 / 6.0, k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

/// Fehlberg 4(5) step; returns the fifth-order solution and the scaled
/// error norm (accept when ≤ 1).
fn rkf45_step(ctx: &Context, y: &[f64], t: f64, k1: &[f64], h: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    let k2 = ctx.rhs(&axpy(y, h, &[(1.0 / 4.0, k1)]), t + h / 4.0)?.1;
    let k3 = ctx.rhs(&axpy(y, h, &[(3.0 / 32.0, k1), (9.0 / 32.0, &k2)]), t + 3.0 * h / 8.0)?.1;
    let k4 = ctx
        .rhs(
            &axpy(y, h, &[(1932.0 / 2197.0, k1), (-7200.0 / 2197.0, &k2), (7296.0 / 2197.0, &k3)]),
            t + 12.0 * h / 13.0,
        )?
        .1;
    let k5 = ctx
        .rhs(
            &axpy(y, h, &[(439.0 / 216.0, k1), (-8.0, &k2), (3680.0 / 513.0, &k3), (-845.0 / 4104.0, &k4)]),
            t + h,
        )?
        .1;
    let k6 = ctx
        .rhs(
            &axpy(
                y,
                h,
                &[(-8.0 / 27.0, k1), (2.0, &k2), (-3544.0 / 2565.0, &k3), (1859.0 / 4104.0, &k4), (-11.0 / 40.0, &k5)],
            ),
            t + h / 2.0,
        )?
        .1;
    let y4 = axpy(y, h, &[(25.0 / 216.0, k1), (1408.0 / 2565.0, &k3), (2197.0 / 4104.0, &k4), (-1.0 / 5.0, &k5)]);
    let y5 = axpy(
        y,
        h,
        &[(16.0 / 135.0, k1), (6656.0 / 12825.0, &k3), (28561.0 / 56430.0, &k4), (-9.0 / 50.0, &k5), (2.0 / 55.0, &k6)],
    );
    let err = y4
        .iter()
        .zip(&y5)
        .zip(y)
        .map(|((a, b), y0)| (a - b).abs() / (tol * y0.abs().max(1.0)))
        .fold(0.0, f64::max);
    Ok((y5, err))
}

/// Integrate the motion of `band` from `initial` for `config.duration`.
///
/// Errors from the velocity field are returned with the index of the step
/// being attempted (0 is the initial point).
pub fn integrate(
    model: &dyn HamiltonianModel,
    band: usize,
    initial: &PhasePoint,
    config: &IntegratorConfig,
    em: Option<&ExternalEMField>,
) -> Result<Trajectory> {
    config.validate()?;
    if band >= model.bands() {
        return Err(Error::InvalidInput(format!("band {band} out of range for a {}-band model", model.bands())));
    }
    if initial.dim() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "initial point has dimension {} but the model has {}",
            initial.dim(),
            model.dim()
        )));
    }
    let ctx = Context { model, band, em, config, dim: initial.dim() };
    let hbar = model.constants().hbar;
    let d = ctx.dim;

    let start = || -> Result<_> {
        let (v, k) = ctx.rhs(&initial.coords()[..2 * d], initial.t())?;
        let frame = crate::spectral::diagonalize(model, initial)?;
        let gauge = Gauge { anchor: best_anchor(&frame, band).0 };
        let (a, _) = ctx.connection(initial, gauge.anchor)?;
        Ok((v, k, gauge, a))
    };
    let (mut vel, mut k1, mut gauge, mut a) = start().map_err(|e| e.at_step(0))?;
    let mut states = vec![ctx.state(*initial, &vel, a.clone(), 0.0, 0.0).map_err(|e| e.at_step(0))?];
    let mut max_spin_ratio = vel.spin_ratio;
    if states[0].epsilon > config.epsilon_abort {
        return Ok(Trajectory { band, states, status: Status::AdiabaticityBreach, max_spin_ratio });
    }

    let t_end = initial.t() + config.duration;
    let mut y = initial.coords()[..2 * d].to_vec();
    let mut t = initial.t();
    let mut h = config.step;
    let mut berry = 0.0;
    let mut dynamic = 0.0;
    let mut accepted = 0usize;
    let finish_tol = 1e-12 * t_end.abs().max(1.0);

    while t_end - t > finish_tol {
        if accepted >= config.max_steps {
            return Ok(Trajectory { band, states, status: Status::MaxSteps, max_spin_ratio });
        }
        let step_index = accepted + 1;
        let advance = |h_try: f64| -> Result<(Vec<f64>, f64, f64)> {
            match config.method {
                Method::Rk4 => Ok((rk4_step(&ctx, &y, t, &k1, h_try)?, h_try, h_try)),
                Method::Rkf45 => {
                    let mut h_try = h_try;
                    loop {
                        let (y_new, err) = rkf45_step(&ctx, &y, t, &k1, h_try, config.tolerance)?;
                        let factor = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.1, 4.0) } else { 4.0 };
                        if err <= 1.0 {
                            return Ok((y_new, h_try, h_try * factor));
                        }
                        h_try *= factor;
                        if h_try < 1e-14 * t.abs().max(1.0) {
                            return Err(Error::Numerical(format!("step size underflow at t = {t}")));
                        }
                    }
                }
            }
        };
        let h_try = h.min(t_end - t);
        let (y_new, h_used, h_next) = advance(h_try).map_err(|e| e.at_step(step_index))?;
        let t_new = if t_end - (t + h_used) <= finish_tol { t_end } else { t + h_used };
        if config.method == Method::Rkf45 {
            h = h_next;
        }

        let m_old = states.last().expect("nonempty").m;
        let advance_state = || -> Result<_> {
            let m_new = ctx.point(&y_new, t_new)?;
            let (v_new, k_new) = ctx.rhs(&y_new, t_new)?;
            let (a_new, frame) = ctx.connection(&m_new, gauge.anchor)?;
            let mut gamma = berry;
            for (k, (a0, a1)) in a.iter().zip(&a_new).enumerate() {
                gamma += 0.5 * (a0 + a1) * (m_new.coord(k) - m_old.coord(k));
            }
            let dr: f64 = (0..d)
                .map(|i| 0.5 * (m_old.p()[i] + m_new.p()[i]) * (m_new.r()[i] - m_old.r()[i]))
                .sum();
            let de = 0.5 * (vel.energy + v_new.energy) * (t_new - m_old.t());
            let phi = dynamic + (dr - de) / hbar;

            let u = frame.column(band);
            let (best, max) = best_anchor(&frame, band);
            let mut anchor = gauge.anchor;
            let mut a_out = a_new;
            if u[anchor].norm() < ANCHOR_SWITCH * max {
                let (zo, zn) = (u[anchor], u[best]);
                let jump = (zo / zo.norm() * zn.conj() / zn.norm()).arg();
                gamma -= jump;
                anchor = best;
                a_out = ctx.connection(&m_new, anchor)?.0;
            }
            Ok((m_new, v_new, k_new, a_out, anchor, gamma, phi))
        };
        let (m_new, v_new, k_new, a_new, anchor, gamma, phi) = advance_state().map_err(|e| e.at_step(step_index))?;
        gauge.anchor = anchor;
        accepted += 1;
        berry = gamma;
        dynamic = phi;
        y = y_new;
        t = t_new;
        a = a_new;
        max_spin_ratio = max_spin_ratio.max(v_new.spin_ratio);
        let s = ctx.state(m_new, &v_new, a.clone(), berry, dynamic).map_err(|e| e.at_step(step_index))?;
        let breach = s.epsilon > config.epsilon_abort;
        states.push(s);
        vel = v_new;
        k1 = k_new;
        if breach {
            return Ok(Trajectory { band, states, status: Status::AdiabaticityBreach, max_spin_ratio });
        }
    }
    Ok(Trajectory { band, states, status: Status::Completed, max_spin_ratio })
}
