//! Run configuration: a JSON document validated into typed sections.
//!
//! Validation never stops at the first problem. Every section that is present
//! is parsed on its own and then checked semantically, and all violations are
//! returned together.

use std::path::PathBuf;

use clap::ValueEnum;
use nalgebra::Vector3;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use sgk_core::dynamics::{Coupling, CurvatureSource, DeltaP, ExternalEMField, IntegratorConfig, Method, VelocityOptions};
use sgk_core::gauge::PlaquetteOptions;
use sgk_core::phase_space::axis_labels;
use sgk_core::scenarios::{Field, IndexProfile, OpticalScenario, RashbaScenario, SpinOrbitScenario, ZeemanScenario};
use sgk_core::spectral::HamiltonianModel;
use sgk_core::transport::Sampler;
use sgk_core::{Constants, PhasePoint};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RunScenario,
    CurvatureMap,
    ChernCharge,
    Ensemble,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RunScenario => "run-scenario",
            Command::CurvatureMap => "curvature-map",
            Command::ChernCharge => "chern-charge",
            Command::Ensemble => "ensemble",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Zeeman {
        #[serde(default = "three")]
        dim: usize,
        field: Field,
        #[serde(default)]
        constants: Constants,
    },
    SpinOrbit {
        #[serde(default = "three")]
        dim: usize,
        magnetic: Field,
        electric: Field,
        #[serde(default)]
        constants: Constants,
    },
    Rashba {
        /// In-plane electric field `(E_x, E_y)`.
        electric: [f64; 2],
        magnetic: f64,
        #[serde(default)]
        constants: Constants,
    },
    Optical {
        index: IndexProfile,
        k0: f64,
    },
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    #[serde(default)]
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPName {
    Gap,
    SpinTexture,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DeltaPSpec {
    Named(DeltaPName),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingName {
    Exact,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureName {
    Auto,
    SplitForm,
    Plaquette,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: MethodName,
    pub step: f64,
    pub tolerance: f64,
    pub duration: f64,
    pub max_steps: usize,
    pub epsilon_abort: f64,
    /// `None` picks the scenario default.
    pub delta_p: Option<DeltaPSpec>,
    pub coupling: CouplingName,
    pub curvature: CurvatureName,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSpec {
            method: MethodName::Rk4,
            step: d.step,
            tolerance: d.tolerance,
            duration: d.duration,
            max_steps: d.max_steps,
            epsilon_abort: d.epsilon_abort,
            delta_p: None,
            coupling: CouplingName::Exact,
            curvature: CurvatureName::Auto,
        }
    }
}

impl IntegratorSpec {
    pub fn build(&self, default_delta_p: DeltaP) -> IntegratorConfig {
        let delta_p = match self.delta_p {
            None => default_delta_p,
            Some(DeltaPSpec::Named(DeltaPName::Gap)) => DeltaP::Gap,
            Some(DeltaPSpec::Named(DeltaPName::SpinTexture)) => DeltaP::SpinTexture,
            Some(DeltaPSpec::Fixed(v)) => DeltaP::Fixed(v),
        };
        let curvature = match self.curvature {
            CurvatureName::Auto => CurvatureSource::Auto,
            CurvatureName::SplitForm => CurvatureSource::SplitForm { step: None },
            CurvatureName::Plaquette => CurvatureSource::Plaquette(PlaquetteOptions::default()),
            CurvatureName::Zero => CurvatureSource::Zero,
        };
        let coupling = match self.coupling {
            CouplingName::Exact => Coupling::Exact,
            CouplingName::Perturbative => Coupling::Perturbative,
        };
        IntegratorConfig {
            method: match self.method {
                MethodName::Rk4 => Method::Rk4,
                MethodName::Rkf45 => Method::Rkf45,
            },
            step: self.step,
            tolerance: self.tolerance,
            duration: self.duration,
            max_steps: self.max_steps,
            epsilon_abort: self.epsilon_abort,
            delta_p,
            velocity: VelocityOptions {
                curvature,
                coupling,
                ..VelocityOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmSpec {
    #[serde(default)]
    pub electric: Option<Field>,
    #[serde(default)]
    pub magnetic: Option<Field>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub axis: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMethod {
    SplitForm,
    Plaquette,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureMapSpec {
    #[serde(default)]
    pub base: Option<InitialSpec>,
    pub axes: Vec<AxisSpec>,
    #[serde(default)]
    pub method: Option<MapMethod>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub richardson: bool,
}

pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChernSpace {
    /// The `H1` vector itself.
    Field,
    P,
    R,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChernSpec {
    pub space: ChernSpace,
    pub center: [f64; 3],
    pub radius: f64,
    /// The flux is recomputed at `check_factor · radius`.
    pub check_factor: f64,
    pub tolerance: f64,
    pub polar: usize,
    pub azimuthal: usize,
    /// Bands to report; all bands when absent.
    pub bands: Option<Vec<usize>>,
    /// Point supplying the coordinates that are not swept in `p` or `r` space.
    pub base: Option<InitialSpec>,
}

impl Default for ChernSpec {
    fn default() -> Self {
        ChernSpec {
            space: ChernSpace::Field,
            center: [0.0; 3],
            radius: 0.5,
            check_factor: 2.0,
            tolerance: 1e-6,
            polar: 48,
            azimuthal: 96,
            bands: None,
            base: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub sampler: Sampler,
    #[serde(default)]
    pub bands: Option<[usize; 2]>,
    #[serde(default)]
    pub transverse: Option<[f64; 3]>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub polarization: Option<[f64; 2]>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: Option<ScenarioSpec>,
    pub initial: Option<InitialSpec>,
    pub band: usize,
    pub integrator: IntegratorSpec,
    pub em: Option<EmSpec>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub curvature_map: Option<CurvatureMapSpec>,
    pub chern: ChernSpec,
    pub ensemble: Option<EnsembleSection>,
}

/// A scenario instantiated from its spec with the defaults it implies.
pub struct Built {
    pub model: Box<dyn HamiltonianModel>,
    pub em: Option<ExternalEMField>,
    pub delta_p: DeltaP,
    pub bands: [usize; 2],
    pub transverse: Vector3<f64>,
}

impl std::fmt::Debug for Built {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Built").field("dim", &self.model.dim()).field("bands", &self.model.bands()).finish()
    }
}

impl ScenarioSpec {
    pub fn build(&self, em: Option<&EmSpec>) -> sgk_core::Result<Built> {
        let external = em.map(|e| {
            ExternalEMField::from_fields(
                e.electric.clone().unwrap_or_else(Field::zero),
                e.magnetic.clone().unwrap_or_else(Field::zero),
            )
        });
        let generic = |model: Box<dyn HamiltonianModel>| Built {
            model,
            em: external.clone(),
            delta_p: DeltaP::Gap,
            bands: [0, 1],
            transverse: Vector3::y(),
        };
        Ok(match self {
            ScenarioSpec::Zeeman { dim, field, constants } => {
                generic(Box::new(ZeemanScenario::new(*dim, field.clone(), *constants)?))
            }
            ScenarioSpec::SpinOrbit { dim, magnetic, electric, constants } => generic(Box::new(SpinOrbitScenario::new(
                *dim,
                magnetic.clone(),
                electric.clone(),
                *constants,
            )?)),
            ScenarioSpec::Rashba { electric, magnetic, constants } => {
                let scn = RashbaScenario::new(Vector3::new(electric[0], electric[1], 0.0), *magnetic, *constants)?;
                let em = Some(scn.em());
                Built {
                    model: Box::new(scn),
                    em,
                    delta_p: DeltaP::SpinTexture,
                    bands: [0, 1],
                    transverse: Vector3::new(-electric[1], electric[0], 0.0),
                }
            }
            ScenarioSpec::Optical { index, k0 } => Built {
                model: Box::new(OpticalScenario::new(*index, *k0)?),
                em: external,
                delta_p: DeltaP::SpinTexture,
                bands: [0, 2],
                transverse: Vector3::z(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ScenarioSpec::Zeeman { dim, .. } | ScenarioSpec::SpinOrbit { dim, .. } => *dim,
            ScenarioSpec::Rashba { .. } => 2,
            ScenarioSpec::Optical { .. } => 3,
        }
    }
}

impl InitialSpec {
    pub fn point(&self) -> sgk_core::Result<PhasePoint> {
        PhasePoint::new(&self.p, &self.r, self.t)
    }

    fn check(&self, path: &str, dim: usize, errs: &mut Vec<String>) {
        for (name, v) in [("p", &self.p), ("r", &self.r)] {
            if v.len() != dim {
                errs.push(format!("{path}.{name}: expected {dim} components, got {}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                errs.push(format!("{path}.{name}: components must be finite"));
            }
        }
        if !self.t.is_finite() {
            errs.push(format!("{path}.t: must be finite"));
        }
    }
}

/// Flat axis index of a label such as `p1`, `r3` or `t`.
pub fn parse_axis(label: &str, dim: usize) -> Option<usize> {
    axis_labels(dim).iter().position(|l| l == label)
}

const KEYS: &[&str] = &[
    "format_version",
    "command",
    "scenario",
    "initial",
    "band",
    "integrator",
    "em",
    "seed",
    "out_dir",
    "curvature_map",
    "chern",
    "ensemble",
];

fn section<T: DeserializeOwned>(obj: &Map<String, Value>, key: &str, errs: &mut Vec<String>) -> Option<T> {
    let v = obj.get(key)?;
    match serde_json::from_value(v.clone()) {
        Ok(x) => Some(x),
        Err(e) => {
            errs.push(format!("{key}: {e}"));
            None
        }
    }
}

fn finite_positive(path: &str, v: f64, errs: &mut Vec<String>) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{path}: must be positive and finite, got {v}"));
    }
}

/// Parse and validate a configuration for `command`. On failure every
/// violation found is returned.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig, Vec<String>> {
    let value: Value = serde_json::from_str(text).map_err(|e| vec![format!("document: {e}")])?;
    let Value::Object(obj) = value else {
        return Err(vec!["document: top level must be a JSON object".into()]);
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) {
            errs.push(format!("{key}: unknown field, expected one of {}", KEYS.join(", ")));
        }
    }

    if let Some(v) = section::<u32>(&obj, "format_version", &mut errs) {
        if v != FORMAT_VERSION {
            errs.push(format!("format_version: unsupported version {v}, expected {FORMAT_VERSION}"));
        }
    }
    if let Some(c) = section::<Command>(&obj, "command", &mut errs) {
        if c != command {
            errs.push(format!("command: document is for {} but {} was requested", c.name(), command.name()));
        }
    }
    let scenario = section::<ScenarioSpec>(&obj, "scenario", &mut errs);
    let initial = section::<InitialSpec>(&obj, "initial", &mut errs);
    let band = section::<usize>(&obj, "band", &mut errs).unwrap_or(0);
    let integrator = section::<IntegratorSpec>(&obj, "integrator", &mut errs);
    let em = section::<EmSpec>(&obj, "em", &mut errs);
    let seed = section::<u64>(&obj, "seed", &mut errs).unwrap_or(0);
    let out_dir = section::<PathBuf>(&obj, "out_dir", &mut errs);
    let curvature_map = section::<CurvatureMapSpec>(&obj, "curvature_map", &mut errs);
    let chern = section::<ChernSpec>(&obj, "chern", &mut errs);
    let ensemble = section::<EnsembleSection>(&obj, "ensemble", &mut errs);

    let needs_scenario = command != Command::Verify;
    if needs_scenario && !obj.contains_key("scenario") {
        errs.push("scenario: required".into());
    }
    let built = scenario.as_ref().and_then(|s| match s.build(em.as_ref()) {
        Ok(b) => Some(b),
        Err(e) => {
            errs.push(format!("scenario: {e}"));
            None
        }
    });
    if matches!(scenario, Some(ScenarioSpec::Rashba { .. })) && em.is_some() {
        errs.push("em: the rashba scenario defines its own fields".into());
    }
    let dim = scenario.as_ref().map(ScenarioSpec::dim);
    let bands = built.as_ref().map(|b| b.model.bands());

    if let Some(b) = bands {
        if band >= b {
            errs.push(format!("band: {band} out of range for a {b}-band model"));
        }
    }

    if command == Command::RunScenario && !obj.contains_key("initial") {
        errs.push("initial: required for run-scenario".into());
    }
    if let (Some(i), Some(d)) = (&initial, dim) {
        i.check("initial", d, &mut errs);
    }

    let integrator = integrator.unwrap_or_default();
    if let Some(DeltaPSpec::Fixed(v)) = integrator.delta_p {
        finite_positive("integrator.delta_p", v, &mut errs);
    }
    if let Err(e) = integrator.build(DeltaP::Gap).validate() {
        let msg = e.to_string();
        let msg = msg.strip_prefix("invalid input: ").unwrap_or(&msg);
        errs.extend(msg.split("; ").map(|m| format!("integrator: {m}")));
    }

    if command == Command::CurvatureMap && !obj.contains_key("curvature_map") {
        errs.push("curvature_map: required for curvature-map".into());
    }
    if let Some(cm) = &curvature_map {
        if let Some(d) = dim {
            if let Some(b) = &cm.base {
                b.check("curvature_map.base", d, &mut errs);
            }
            for (k, a) in cm.axes.iter().enumerate() {
                if parse_axis(&a.axis, d).is_none() {
                    errs.push(format!("curvature_map.axes[{k}].axis: unknown axis {:?}, expected one of {}", a.axis, axis_labels(d).join(", ")));
                }
            }
        }
        if cm.axes.is_empty() {
            errs.push("curvature_map.axes: at least one axis is required".into());
        }
        for (k, a) in cm.axes.iter().enumerate() {
            if a.count == 0 {
                errs.push(format!("curvature_map.axes[{k}].count: must be at least 1"));
            }
            if !(a.lo.is_finite() && a.hi.is_finite()) {
                errs.push(format!("curvature_map.axes[{k}]: bounds must be finite"));
            }
        }
        let total = cm.axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.count));
        if total.is_none_or(|t| t > MAX_GRID_POINTS) {
            errs.push(format!("curvature_map.axes: grid exceeds {MAX_GRID_POINTS} points"));
        }
        if let Some(s) = cm.step {
            finite_positive("curvature_map.step", s, &mut errs);
        }
    }

    let chern = chern.unwrap_or_default();
    if obj.contains_key("chern") || command == Command::ChernCharge {
        finite_positive("chern.radius", chern.radius, &mut errs);
        if !(chern.check_factor > 1.0 && chern.check_factor.is_finite()) {
            errs.push(format!("chern.check_factor: must exceed 1, got {}", chern.check_factor));
        }
        finite_positive("chern.tolerance", chern.tolerance, &mut errs);
        if chern.polar < 2 || chern.azimuthal < 3 {
            errs.push("chern: need at least 2 polar and 3 azimuthal nodes".into());
        }
        if chern.center.iter().any(|x| !x.is_finite()) {
            errs.push("chern.center: components must be finite".into());
        }
        if let (Some(bs), Some(n)) = (&chern.bands, bands) {
            for b in bs.iter().filter(|&&b| b >= n) {
                errs.push(format!("chern.bands: {b} out of range for a {n}-band model"));
            }
        }
        if let Some(d) = dim {
            if chern.space != ChernSpace::Field && d != 3 {
                errs.push(format!("chern.space: p and r spaces need dimension 3, scenario has {d}"));
            }
            if let Some(b) = &chern.base {
                b.check("chern.base", d, &mut errs);
            }
        }
    }

    if command == Command::Ensemble && !obj.contains_key("ensemble") {
        errs.push("ensemble: required for ensemble".into());
    }
    if let Some(en) = &ensemble {
        if let Some(d) = dim {
            if let Err(e) = en.sampler.validate(d) {
                errs.push(format!("ensemble.sampler: {e}"));
            }
        }
        if let (Some(bs), Some(n)) = (en.bands, bands) {
            if bs.iter().any(|&b| b >= n) || bs[0] == bs[1] {
                errs.push(format!("ensemble.bands: need two distinct bands below {n}, got {bs:?}"));
            }
        }
        if let Some(t) = en.transverse {
            let v = Vector3::from(t);
            if !(v.norm() > 0.0 && v.norm().is_finite()) {
                errs.push("ensemble.transverse: must be a nonzero finite vector".into());
            }
        }
        if !en.t0.is_finite() {
            errs.push("ensemble.t0: must be finite".into());
        }
        if let Some(f) = en.polarization {
            if f.iter().any(|x| !(0.0..=1.0).contains(x)) || (f[0] + f[1] - 1.0).abs() > 1e-12 {
                errs.push(format!("ensemble.polarization: fractions must lie in [0, 1] and sum to 1, got {f:?}"));
            }
        }
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(RunConfig {
        command,
        scenario,
        initial,
        band,
        integrator,
        em,
        seed,
        out_dir,
        curvature_map,
        chern,
        ensemble,
    })
}
