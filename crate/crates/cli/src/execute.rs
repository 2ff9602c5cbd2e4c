//! Command execution against a validated configuration.

use std::path::Path;

use nalgebra::Vector3;

use sgk_core::dynamics::{integrate, Status};
use sgk_core::gauge::curvature::Block;
use sgk_core::gauge::grid::curvature_at;
use sgk_core::gauge::topology::sphere_flux;
use sgk_core::gauge::{curvature_map, monopole_curvature, CurvatureMethod, Grid, GridAxis, PlaquetteOptions, SphereQuadrature};
use sgk_core::phase_space::axis_labels;
use sgk_core::transport::{polarization_current, run_ensemble, EnsembleSpec};
use sgk_core::{Error, Execution, PhasePoint};

use crate::config::{parse_axis, Built, ChernSpace, Command, MapMethod, RunConfig};
use crate::output::{num, Artifacts, Record, Table};
use crate::{verify, CliError};

/// Run the configured command, writing its artifacts under `out`.
pub fn execute(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::new(out)?;
    if cfg.command == Command::Verify {
        let checks = verify::run_checks(cfg.seed, exec);
        let lines: Vec<String> = checks.iter().map(verify::Check::record).collect();
        art.write_lines("verify.jsonl", &lines)?;
        for l in &lines {
            println!("{l}");
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        if failed > 0 {
            return Err(CliError::Verify { failed, total: checks.len() });
        }
        return Ok(art);
    }
    let scenario = cfg.scenario.as_ref().ok_or_else(|| CliError::Schema(vec!["scenario: required".into()]))?;
    let built = scenario.build(cfg.em.as_ref())?;
    match cfg.command {
        Command::RunScenario => run_scenario(cfg, &built, &mut art)?,
        Command::CurvatureMap => map(cfg, &built, exec, &mut art)?,
        Command::ChernCharge => chern(cfg, &built, exec, &mut art)?,
        Command::Ensemble => ensemble(cfg, &built, exec, &mut art)?,
        Command::Verify => unreachable!(),
    }
    Ok(art)
}

fn run_scenario(cfg: &RunConfig, built: &Built, art: &mut Artifacts) -> Result<(), CliError> {
    let model = built.model.as_ref();
    let initial = cfg
        .initial
        .as_ref()
        .ok_or_else(|| CliError::Schema(vec!["initial: required for run-scenario".into()]))?
        .point()?;
    let config = cfg.integrator.build(built.delta_p);
    let traj = integrate(model, cfg.band, &initial, &config, built.em.as_ref())?;

    let labels = axis_labels(model.dim());
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend(labels[..2 * model.dim()].iter().cloned());
    cols.extend(["band", "energy", "epsilon", "berry_phase", "dynamic_phase"].map(String::from));
    let mut table = Table::new(&cols);
    for s in &traj.states {
        let mut row = vec![num(s.m.t())];
        row.extend(s.m.p().iter().chain(s.m.r()).map(|&x| num(x)));
        row.push(s.band.to_string());
        row.extend([s.energy, s.epsilon, s.berry_phase, s.dynamic_phase].map(num));
        table.row(&row);
    }
    art.write("trajectory.csv", &table.into_string())?;

    let first = &traj.states[0];
    let last = traj.last();
    let status = match traj.status {
        Status::Completed => "completed",
        Status::MaxSteps => "max_steps",
        Status::AdiabaticityBreach => "adiabaticity_breach",
    };
    let max_eps = traj.states.iter().map(|s| s.epsilon).fold(0.0, f64::max);
    let summary = Record::new("trajectory_summary")
        .str("status", status)
        .int("band", cfg.band as u64)
        .int("steps", (traj.states.len() - 1) as u64)
        .num("t_final", last.m.t())
        .nums("p_final", last.m.p())
        .nums("r_final", last.m.r())
        .num("energy_change", last.energy - first.energy)
        .num("max_epsilon", max_eps)
        .num("berry_phase", last.berry_phase)
        .num("dynamic_phase", last.dynamic_phase)
        .nums("generalized_p", &last.generalized_p)
        .nums("generalized_r", &last.generalized_r)
        .num("max_spin_ratio", traj.max_spin_ratio)
        .bool("spin_warning", traj.spin_warning())
        .finish();
    art.write_lines("summary.jsonl", &[summary])?;

    if traj.status == Status::AdiabaticityBreach {
        return Err(CliError::Adiabaticity {
            t: last.m.t(),
            epsilon: last.epsilon,
            step: traj.states.len() - 1,
        });
    }
    Ok(())
}

fn map(cfg: &RunConfig, built: &Built, exec: Execution, art: &mut Artifacts) -> Result<(), CliError> {
    let model = built.model.as_ref();
    let spec = cfg
        .curvature_map
        .as_ref()
        .ok_or_else(|| CliError::Schema(vec!["curvature_map: required for curvature-map".into()]))?;
    let dim = model.dim();
    let base = match &spec.base {
        Some(b) => b.point()?,
        None => PhasePoint::origin(dim),
    };
    let axes = spec
        .axes
        .iter()
        .map(|a| GridAxis {
            axis: parse_axis(&a.axis, dim).expect("validated axis"),
            lo: a.lo,
            hi: a.hi,
            count: a.count,
        })
        .collect();
    let grid = Grid::new(base, axes)?;
    let method = match spec.method {
        Some(MapMethod::Plaquette) => CurvatureMethod::Plaquette(PlaquetteOptions {
            step: spec.step,
            richardson: spec.richardson,
        }),
        Some(MapMethod::SplitForm) => CurvatureMethod::SplitForm(spec.step),
        None if model.split_form().is_some() => CurvatureMethod::SplitForm(spec.step),
        None => CurvatureMethod::Plaquette(PlaquetteOptions {
            step: spec.step,
            richardson: spec.richardson,
        }),
    };
    let results = curvature_map(model, &grid, &method, exec);

    let labels = axis_labels(dim);
    let n = labels.len();
    let mut cols = labels.clone();
    for b in 0..model.bands() {
        for i in 0..n {
            for j in (i + 1)..n {
                cols.push(format!("F{b}_{}_{}", labels[i], labels[j]));
            }
        }
    }
    cols.push("status".into());
    let mut table = Table::new(&cols);
    let mut first_err: Option<Error> = None;
    let mut failed = 0;
    for (p, r) in &results {
        let mut row: Vec<String> = p.coords().iter().map(|&x| num(x)).collect();
        match r {
            Ok(f) => {
                for b in 0..model.bands() {
                    for i in 0..n {
                        for j in (i + 1)..n {
                            row.push(num(f.get(b, i, j)));
                        }
                    }
                }
                row.push("ok".into());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(num(f64::NAN), cols.len() - n - 1));
                row.push(e.kind().into());
                failed += 1;
                first_err.get_or_insert_with(|| e.clone());
            }
        }
        table.row(&row);
    }
    if failed == results.len() {
        return Err(first_err.expect("at least one point").into());
    }
    art.write("curvature_map.csv", &table.into_string())?;
    Ok(())
}

fn chern(cfg: &RunConfig, built: &Built, exec: Execution, art: &mut Artifacts) -> Result<(), CliError> {
    let model = built.model.as_ref();
    let spec = &cfg.chern;
    let quad = SphereQuadrature {
        polar: spec.polar,
        azimuthal: spec.azimuthal,
        check_factor: spec.check_factor,
        tolerance: spec.tolerance,
    };
    let center = Vector3::from(spec.center);
    let bands: Vec<usize> = spec.bands.clone().unwrap_or_else(|| (0..model.bands()).collect());
    let charges = model.split_form().map(|sf| sf.spin().charges());
    let base = match &spec.base {
        Some(b) => b.point()?,
        None => PhasePoint::origin(model.dim()),
    };
    let method = if model.split_form().is_some() {
        CurvatureMethod::SplitForm(None)
    } else {
        CurvatureMethod::Plaquette(PlaquetteOptions::default())
    };
    let space = match spec.space {
        ChernSpace::Field => "field",
        ChernSpace::P => "p",
        ChernSpace::R => "r",
    };
    let mut lines = Vec::new();
    for &band in &bands {
        let field = |x: &Vector3<f64>| -> sgk_core::Result<Vector3<f64>> {
            match spec.space {
                ChernSpace::Field => {
                    let s = charges
                        .as_ref()
                        .ok_or_else(|| Error::InvalidInput("field-space charges need a split-form model".into()))?[band];
                    monopole_curvature(x, s)
                }
                ChernSpace::P => Ok(curvature_at(model, &base.with_p(x.as_slice()), &method)?.pseudovector(band, Block::PP)),
                ChernSpace::R => Ok(curvature_at(model, &base.with_r(x.as_slice()), &method)?.pseudovector(band, Block::RR)),
            }
        };
        let outer_radius = spec.radius * spec.check_factor;
        let inner = sphere_flux(&field, &center, spec.radius, &quad, exec)?;
        let outer = sphere_flux(&field, &center, outer_radius, &quad, exec)?;
        if (inner - outer).abs() > quad.tolerance * inner.abs().max(1.0) {
            return Err(Error::Quadrature {
                inner_radius: spec.radius,
                outer_radius,
                inner,
                outer,
            }
            .into());
        }
        let mut rec = Record::new("chern_charge").str("space", space).int("band", band as u64);
        if let Some(c) = &charges {
            rec = rec.num("spin", c[band].value());
        }
        lines.push(
            rec.nums("center", center.as_slice())
                .num("radius", spec.radius)
                .num("outer_radius", outer_radius)
                .num("flux", inner)
                .num("outer_flux", outer)
                .num("charge", inner)
                .finish(),
        );
    }
    art.write_lines("chern.jsonl", &lines)?;
    for l in &lines {
        println!("{l}");
    }
    Ok(())
}

fn ensemble(cfg: &RunConfig, built: &Built, exec: Execution, art: &mut Artifacts) -> Result<(), CliError> {
    let sec = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| CliError::Schema(vec!["ensemble: required for ensemble".into()]))?;
    let spec = EnsembleSpec {
        sampler: sec.sampler.clone(),
        seed: cfg.seed,
        t0: sec.t0,
        config: cfg.integrator.build(built.delta_p),
        bands: sec.bands.unwrap_or(built.bands),
        transverse: sec.transverse.map(Vector3::from).unwrap_or(built.transverse),
    };
    let rep = run_ensemble(built.model.as_ref(), built.em.as_ref(), &spec, exec)?;

    let mut table = Table::new(&["sample", "band", "displacement", "initial_velocity", "mean_velocity"]);
    for pair in &rep.samples {
        for s in pair {
            table.row(&[
                s.sample.to_string(),
                s.band.to_string(),
                num(s.displacement),
                num(s.initial_velocity),
                num(s.mean_velocity),
            ]);
        }
    }
    art.write("ensemble_samples.csv", &table.into_string())?;

    let axis = spec.transverse.normalize();
    let mut report = Record::new("transport_report")
        .int("seed", cfg.seed)
        .nums("transverse", axis.as_slice())
        .int("total_samples", rep.total_samples as u64)
        .int("used_samples", rep.samples.len() as u64);
    for (k, b) in rep.bands.iter().enumerate() {
        report = report
            .int(&format!("band{k}"), b.band as u64)
            .num(&format!("band{k}_mean_displacement"), b.mean_displacement)
            .num(&format!("band{k}_displacement_se"), b.displacement_se)
            .num(&format!("band{k}_mean_velocity"), b.mean_velocity)
            .num(&format!("band{k}_velocity_se"), b.velocity_se);
    }
    report = report
        .num("spin_current", rep.spin_current)
        .num("spin_current_se", rep.spin_current_se)
        .num("splitting", rep.splitting)
        .num("splitting_se", rep.splitting_se);
    if let Some(f) = sec.polarization {
        report = report.nums("polarization", &f).num("polarization_current", polarization_current(&rep, f)?);
    }
    let mut lines = vec![report.finish()];
    for f in &rep.failures {
        lines.push(
            Record::new("trajectory_failure")
                .int("sample", f.sample as u64)
                .int("band", f.band as u64)
                .str("kind", &f.kind)
                .str("message", &f.message)
                .finish(),
        );
    }
    art.write_lines("ensemble.jsonl", &lines)?;
    Ok(())
}
