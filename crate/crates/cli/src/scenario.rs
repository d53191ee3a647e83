//! Scenario files: a JSON document with `"spec_version": 1`.
//!
//! Every optional key has an explicit default that is written back out when a
//! scenario is serialized, so a parsed file is always fully materialized.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub spec_version: u32,
    pub name: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default)]
    pub stencil: StencilSpec,
    /// Potential energy V₁.
    #[serde(default)]
    pub potential: PotentialSpec,
    /// Scalar potential A₀, multiplied by the charge.
    #[serde(default)]
    pub scalar_potential: PotentialSpec,
    /// Vector potential A.
    #[serde(default)]
    pub vector_potential: PotentialSpec,
    #[serde(default)]
    pub interaction: Option<InteractionSpec>,
    #[serde(default)]
    pub initial_state: StateSpec,
    pub task: Task,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default = "one")]
    pub record_stride: usize,
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub boundary: BoundarySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    #[default]
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    #[serde(default = "unit")]
    pub hbar: f64,
    #[serde(default = "unit")]
    pub mass: f64,
    #[serde(default = "unit")]
    pub charge: f64,
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, charge: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilSpec {
    #[default]
    SecondOrder,
    FourthOrder,
}

/// Named analytic potentials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Free,
    Constant {
        value: f64,
    },
    /// ½ m ω² (x − center)², with m taken from the constants.
    Harmonic {
        #[serde(default = "unit")]
        omega: f64,
        #[serde(default)]
        center: f64,
    },
    Quartic {
        #[serde(default = "unit")]
        strength: f64,
        #[serde(default)]
        center: f64,
    },
    /// Zero on [left, right], `height` outside.
    Box {
        left: f64,
        right: f64,
        height: f64,
    },
}

impl PotentialSpec {
    pub fn is_free(&self) -> bool {
        matches!(self, PotentialSpec::Free)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InteractionSpec {
    /// g·δ(x − x′) between each of `particles` bosons.
    Contact { g: f64, particles: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "unit")]
        sigma: f64,
        #[serde(default)]
        wavenumber: f64,
    },
    /// Uniform complex amplitudes in the unit square; needs `rng_seed`.
    Random,
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Gaussian { center: 0.0, sigma: 1.0, wavenumber: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    #[default]
    CrankNicolson,
    SplitOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateSpec {
    #[default]
    PredictorCorrector,
    RecomputeEachHalfStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionSpec {
    #[default]
    Simple,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Propagate {
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_steps")]
        n_steps: usize,
        #[serde(default)]
        scheme: SchemeSpec,
    },
    GroundState {
        /// Imaginary-time step.
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_ground_iter")]
        max_iter: usize,
    },
    RayleighRitz {
        #[serde(default)]
        family: TrialSpec,
        initial_params: Vec<f64>,
        #[serde(default = "default_nm_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        ftol: f64,
        #[serde(default = "default_xtol")]
        xtol: f64,
        #[serde(default = "default_step")]
        initial_step: f64,
    },
    GpPropagate {
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_steps")]
        n_steps: usize,
        #[serde(default)]
        nonlinear_update: UpdateSpec,
        /// Relax `initial_state` in imaginary time before the real-time run.
        #[serde(default = "yes")]
        start_from_ground_state: bool,
        #[serde(default = "default_gp_dtau")]
        ground_dt: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_ground_iter")]
        max_iter: usize,
    },
    /// Propagate, then check conservation laws and action stationarity.
    Verify {
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_steps")]
        n_steps: usize,
        #[serde(default)]
        action: ActionSpec,
        #[serde(default = "default_perturbation")]
        perturbation: StateSpec,
        #[serde(default = "default_epsilons")]
        epsilons: Vec<f64>,
        #[serde(default)]
        thresholds: Thresholds,
    },
}

impl Task {
    pub fn label(&self) -> &'static str {
        match self {
            Task::Propagate { .. } => "propagate",
            Task::GroundState { .. } => "ground-state",
            Task::RayleighRitz { .. } => "rayleigh-ritz",
            Task::GpPropagate { .. } => "gp-propagate",
            Task::Verify { .. } => "verify",
        }
    }
}

/// Trial family for the Rayleigh-Ritz task.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrialSpec {
    /// Parameters: center, sigma.
    #[default]
    Gaussian,
    /// Parameters: center, sigma, wavenumber.
    GaussianWithPhase,
    /// Parameters: c2..c_modes, the first coefficient is fixed to 1.
    BoxSine { left: f64, right: f64, modes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_norm_drift")]
    pub norm_drift: f64,
    #[serde(default = "default_continuity")]
    pub continuity_sup: f64,
    #[serde(default = "default_action_gap")]
    pub action_gap: f64,
    #[serde(default = "default_r1")]
    pub hamilton_r1: f64,
    #[serde(default = "default_slope")]
    pub slope_target: f64,
    #[serde(default = "default_slope_tol")]
    pub slope_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            norm_drift: default_norm_drift(),
            continuity_sup: default_continuity(),
            action_gap: default_action_gap(),
            hamilton_r1: default_r1(),
            slope_target: default_slope(),
            slope_tolerance: default_slope_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative paths resolve against the scenario file's directory.
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_out(), snapshots: true }
    }
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_dt() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    1e-10
}
fn default_xtol() -> f64 {
    1e-7
}
fn default_step() -> f64 {
    0.1
}
fn default_steps() -> usize {
    1000
}
fn default_ground_iter() -> usize {
    100_000
}
fn default_nm_iter() -> usize {
    500
}
fn default_gp_dtau() -> f64 {
    0.02
}
fn default_perturbation() -> StateSpec {
    StateSpec::Gaussian { center: 0.5, sigma: 1.0, wavenumber: 0.5 }
}
fn default_epsilons() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2]
}
fn default_norm_drift() -> f64 {
    1e-10
}
fn default_continuity() -> f64 {
    1e-6
}
fn default_action_gap() -> f64 {
    1e-8
}
fn default_r1() -> f64 {
    1e-5
}
fn default_slope() -> f64 {
    2.0
}
fn default_slope_tol() -> f64 {
    0.15
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Parse and validate scenario text.
pub fn parse_str(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!("{path}: {inner}"))
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Read, parse and validate a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    parse_str(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite and > 0 (got {v})")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite (got {v})")))
    }
}

impl Scenario {
    /// Checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.spec_version != SPEC_VERSION {
            return Err(bad(
                "spec_version",
                format!("unsupported version {} (expected {SPEC_VERSION})", self.spec_version),
            ));
        }
        let ok_name = !self.name.is_empty()
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
        if !ok_name || self.name.starts_with('.') {
            return Err(bad("name", "must be a non-empty identifier of [A-Za-z0-9_.-]"));
        }
        let g = &self.grid;
        if g.n_points < 8 {
            return Err(bad("grid.n_points", format!("must be >= 8 (got {})", g.n_points)));
        }
        finite("grid.x_min", g.x_min)?;
        finite("grid.x_max", g.x_max)?;
        if g.x_max <= g.x_min {
            return Err(bad("grid.x_max", "must exceed grid.x_min"));
        }
        positive("constants.hbar", self.constants.hbar)?;
        positive("constants.mass", self.constants.mass)?;
        finite("constants.charge", self.constants.charge)?;
        for (key, p) in [
            ("potential", &self.potential),
            ("scalar_potential", &self.scalar_potential),
            ("vector_potential", &self.vector_potential),
        ] {
            check_potential(key, p)?;
        }
        if let Some(InteractionSpec::Contact { g, particles }) = &self.interaction {
            finite("interaction.g", *g)?;
            if *particles < 1 {
                return Err(bad("interaction.particles", "must be >= 1"));
            }
        }
        check_state("initial_state", &self.initial_state)?;
        if self.record_stride < 1 {
            return Err(bad("record_stride", "must be >= 1"));
        }
        let mut random = matches!(self.initial_state, StateSpec::Random);
        match &self.task {
            Task::Propagate { dt, scheme, .. } => {
                positive("task.dt", *dt)?;
                if self.interaction.is_some() {
                    return Err(bad("task.kind", "interaction configured; use gp-propagate"));
                }
                if *scheme == SchemeSpec::SplitOperator
                    && (g.boundary != BoundarySpec::Periodic || !self.vector_potential.is_free())
                {
                    return Err(bad(
                        "task.scheme",
                        "split-operator needs a periodic grid and no vector potential",
                    ));
                }
            }
            Task::GroundState { dt, tol, max_iter } => {
                positive("task.dt", *dt)?;
                positive("task.tol", *tol)?;
                if *max_iter < 1 {
                    return Err(bad("task.max_iter", "must be >= 1"));
                }
            }
            Task::RayleighRitz { family, initial_params, max_iter, ftol, xtol, initial_step } => {
                positive("task.ftol", *ftol)?;
                positive("task.xtol", *xtol)?;
                positive("task.initial_step", *initial_step)?;
                if *max_iter < 1 {
                    return Err(bad("task.max_iter", "must be >= 1"));
                }
                let dim = match family {
                    TrialSpec::Gaussian => 2,
                    TrialSpec::GaussianWithPhase => 3,
                    TrialSpec::BoxSine { left, right, modes } => {
                        finite("task.family.left", *left)?;
                        finite("task.family.right", *right)?;
                        if right <= left {
                            return Err(bad("task.family.right", "must exceed task.family.left"));
                        }
                        if *modes < 2 {
                            return Err(bad("task.family.modes", "must be >= 2"));
                        }
                        modes - 1
                    }
                };
                if initial_params.len() != dim {
                    return Err(bad(
                        "task.initial_params",
                        format!("family takes {dim} parameters, got {}", initial_params.len()),
                    ));
                }
            }
            Task::GpPropagate { dt, ground_dt, tol, max_iter, .. } => {
                positive("task.dt", *dt)?;
                positive("task.ground_dt", *ground_dt)?;
                positive("task.tol", *tol)?;
                if *max_iter < 1 {
                    return Err(bad("task.max_iter", "must be >= 1"));
                }
                if self.interaction.is_none() {
                    return Err(bad("interaction", "gp-propagate needs an interaction"));
                }
            }
            Task::Verify { dt, perturbation, epsilons, thresholds, .. } => {
                positive("task.dt", *dt)?;
                if self.interaction.is_some() {
                    return Err(bad("task.kind", "verify runs the linear equation; remove interaction"));
                }
                check_state("task.perturbation", perturbation)?;
                random |= matches!(perturbation, StateSpec::Random);
                let mut distinct: Vec<f64> =
                    epsilons.iter().map(|e| e.abs()).filter(|e| *e > 0.0).collect();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                if epsilons.iter().any(|e| !e.is_finite()) || distinct.len() < 2 {
                    return Err(bad("task.epsilons", "need at least two distinct non-zero finite values"));
                }
                let t = thresholds;
                for (key, v) in [
                    ("task.thresholds.norm_drift", t.norm_drift),
                    ("task.thresholds.continuity_sup", t.continuity_sup),
                    ("task.thresholds.action_gap", t.action_gap),
                    ("task.thresholds.hamilton_r1", t.hamilton_r1),
                    ("task.thresholds.slope_tolerance", t.slope_tolerance),
                ] {
                    positive(key, v)?;
                }
                finite("task.thresholds.slope_target", t.slope_target)?;
            }
        }
        if random && self.rng_seed.is_none() {
            return Err(bad("rng_seed", "required when any state is random"));
        }
        Ok(())
    }

    /// Canonical JSON with every default written out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

fn check_potential(key: &str, p: &PotentialSpec) -> Result<(), CliError> {
    match p {
        PotentialSpec::Free => Ok(()),
        PotentialSpec::Constant { value } => finite(&format!("{key}.value"), *value),
        PotentialSpec::Harmonic { omega, center } => {
            finite(&format!("{key}.omega"), *omega)?;
            finite(&format!("{key}.center"), *center)
        }
        PotentialSpec::Quartic { strength, center } => {
            finite(&format!("{key}.strength"), *strength)?;
            finite(&format!("{key}.center"), *center)
        }
        PotentialSpec::Box { left, right, height } => {
            finite(&format!("{key}.left"), *left)?;
            finite(&format!("{key}.right"), *right)?;
            finite(&format!("{key}.height"), *height)?;
            if right <= left {
                return Err(bad(&format!("{key}.right"), "must exceed left"));
            }
            Ok(())
        }
    }
}

fn check_state(key: &str, s: &StateSpec) -> Result<(), CliError> {
    match s {
        StateSpec::Random => Ok(()),
        StateSpec::Gaussian { center, sigma, wavenumber } => {
            finite(&format!("{key}.center"), *center)?;
            positive(&format!("{key}.sigma"), *sigma)?;
            finite(&format!("{key}.wavenumber"), *wavenumber)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "spec_version": 1,
        "name": "ho",
        "grid": {"x_min": -10, "x_max": 10, "n_points": 201},
        "potential": {"kind": "harmonic"},
        "task": {"kind": "ground-state"}
    }"#;

    #[test]
    fn defaults_are_materialized() {
        let s = parse_str(MINIMAL).unwrap();
        assert_eq!(s.task, Task::GroundState { dt: 1e-3, tol: 1e-10, max_iter: 100_000 });
        assert_eq!(s.potential, PotentialSpec::Harmonic { omega: 1.0, center: 0.0 });
        assert_eq!(s.constants, ConstantsSpec::default());
        assert_eq!(s.record_stride, 1);
        let text = s.to_json();
        for key in ["\"tol\"", "\"max_iter\"", "\"stencil\"", "\"boundary\"", "\"record_stride\"", "\"hbar\""] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let s = parse_str(MINIMAL).unwrap();
        assert_eq!(parse_str(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn too_few_points_names_the_constraint() {
        let e = parse_str(&MINIMAL.replace("201", "4")).unwrap_err().to_string();
        assert!(e.contains("n_points") && e.contains(">= 8"), "{e}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"name\"", "\"constants\": {\"masss\": 2}, \"name\"");
        let e = parse_str(&text).unwrap_err().to_string();
        assert!(e.contains("masss") && e.contains("constants"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn unknown_task_key_is_rejected() {
        let e = parse_str(&MINIMAL.replace("\"ground-state\"", "\"ground-state\", \"tool\": 1"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("tool"), "{e}");
    }

    #[test]
    fn version_and_seed_are_enforced() {
        assert!(parse_str(&MINIMAL.replace("\"spec_version\": 1", "\"spec_version\": 2")).is_err());
        assert!(parse_str(&MINIMAL.replace("\"spec_version\": 1,", "")).is_err());
        let random = MINIMAL.replace("\"name\"", "\"initial_state\": {\"kind\": \"random\"}, \"name\"");
        assert!(parse_str(&random).unwrap_err().to_string().contains("rng_seed"));
        let seeded = random.replace("\"name\"", "\"rng_seed\": 7, \"name\"");
        assert_eq!(parse_str(&seeded).unwrap().rng_seed, Some(7));
    }

    #[test]
    fn task_requirements_are_checked() {
        let gp = MINIMAL.replace("\"ground-state\"", "\"gp-propagate\"");
        assert!(parse_str(&gp).unwrap_err().to_string().contains("interaction"));
        let ritz = MINIMAL.replace(
            "{\"kind\": \"ground-state\"}",
            "{\"kind\": \"rayleigh-ritz\", \"initial_params\": [0.0]}",
        );
        assert!(parse_str(&ritz).unwrap_err().to_string().contains("initial_params"));
    }
}
