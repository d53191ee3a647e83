//! Turns a validated [`Scenario`] into solver calls and output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use qmaction::variational::{NelderMeadOptions, TrialFamily};
use qmaction::{
    ground_state_imaginary_time, make_grid, normalize, propagate, rayleigh_ritz_minimize,
    stationarity_test_with, ActionDensity, Boundary, DiagnosticsRecord, DiagnosticsRecorder, Exec,
    Grid, HamiltonianConfig, KineticStencil, NonlinearUpdate, PhysicalConstants, PotentialField,
    PropagationPlan, Scheme, Trajectory, TwoBodyInteraction, Wavefunction,
};

use crate::error::CliError;
use crate::output::{
    diagnostics_csv, history_csv, num, snapshot_csv, snapshot_name, summary_csv, write_atomic,
};
use crate::scenario::{
    ActionSpec, BoundarySpec, InteractionSpec, PotentialSpec, Scenario, SchemeSpec, StateSpec,
    StencilSpec, Task, Thresholds, TrialSpec, UpdateSpec,
};

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces `output.dir`.
    pub out: Option<PathBuf>,
    /// Replaces `record_stride`.
    pub stride: Option<usize>,
    pub quiet: bool,
    /// Directory that relative `output.dir` paths resolve against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub scenario_name: String,
    pub task: String,
    /// SHA-256 of the materialized scenario JSON.
    pub scenario_hash: String,
    pub toolkit_version: String,
    pub wall_time_seconds: f64,
    pub record_stride: usize,
    pub flags: BTreeMap<String, String>,
    /// True only if every entry of `checks` holds.
    pub converged: bool,
    pub checks: BTreeMap<String, bool>,
    pub summary: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

pub fn scenario_hash(s: &Scenario) -> String {
    Sha256::digest(s.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_grid(s: &Scenario) -> Result<Grid, CliError> {
    let boundary = match s.grid.boundary {
        BoundarySpec::Dirichlet => Boundary::Dirichlet,
        BoundarySpec::Periodic => Boundary::Periodic,
    };
    Ok(make_grid(s.grid.x_min, s.grid.x_max, s.grid.n_points, boundary)?)
}

fn field(p: &PotentialSpec, mass: f64) -> PotentialField {
    match *p {
        PotentialSpec::Free => PotentialField::Zero,
        PotentialSpec::Constant { value } => PotentialField::Constant(value),
        PotentialSpec::Harmonic { omega, center } => PotentialField::harmonic(mass, omega, center),
        PotentialSpec::Quartic { strength, center } => PotentialField::Quartic { strength, center },
        PotentialSpec::Box { left, right, height } => PotentialField::Box { left, right, height },
    }
}

pub fn build_config(s: &Scenario) -> Result<HamiltonianConfig, CliError> {
    let c = &s.constants;
    let mut cfg = HamiltonianConfig::new(PhysicalConstants::new(c.hbar, c.mass, c.charge)?)
        .with_potential(field(&s.potential, c.mass))
        .with_scalar_potential(field(&s.scalar_potential, c.mass))
        .with_vector_potential(field(&s.vector_potential, c.mass))
        .with_stencil(match s.stencil {
            StencilSpec::SecondOrder => KineticStencil::SecondOrder,
            StencilSpec::FourthOrder => KineticStencil::FourthOrder,
        });
    if let Some(InteractionSpec::Contact { g, particles }) = s.interaction {
        cfg = cfg.with_interaction(TwoBodyInteraction::contact(g, particles)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Normalized state on `grid`. `stream` separates independent random states
/// drawn from one seed.
pub fn build_state(
    spec: &StateSpec,
    grid: Grid,
    seed: Option<u64>,
    stream: u64,
) -> Result<Wavefunction, CliError> {
    let psi = match *spec {
        StateSpec::Gaussian { center, sigma, wavenumber } => Wavefunction::from_fn(grid, 0.0, |x| {
            Complex64::from_polar((-(x - center).powi(2) / (4.0 * sigma * sigma)).exp(), wavenumber * x)
        })?,
        StateSpec::Random => {
            let seed = seed.ok_or_else(|| CliError::Config("rng_seed: required for random state".into()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let amps = (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            Wavefunction::new(grid, amps, 0.0)?
        }
    };
    normalize(&psi).map_err(|e| CliError::Config(format!("initial state: {e}")))
}

struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    fn put(&mut self, rel: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.dir.join(rel), contents.as_bytes())?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn snapshots(&mut self, traj: &Trajectory, stride: usize) -> Result<(), CliError> {
        for (i, psi) in traj.snapshots().iter().enumerate() {
            let step = i * stride;
            self.put(&format!("snapshots/{}", snapshot_name(step)), &snapshot_csv(psi, step))?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Outcome {
    checks: BTreeMap<String, bool>,
    summary: Vec<(String, f64)>,
}

impl Outcome {
    fn scalar(&mut self, k: &str, v: f64) {
        self.summary.push((k.to_string(), v));
    }
    fn check(&mut self, k: &str, ok: bool) {
        self.checks.insert(k.to_string(), ok);
    }
}

/// Output directory for a scenario under the given overrides.
pub fn output_dir(s: &Scenario, opts: &RunOptions) -> PathBuf {
    match &opts.out {
        Some(p) => p.clone(),
        None if s.output.dir.is_absolute() => s.output.dir.clone(),
        None => opts.base_dir.join(&s.output.dir),
    }
}

/// Execute a scenario and write its outputs. Non-convergence is reported
/// through [`RunManifest::converged`], not as an error.
pub fn run(s: &Scenario, opts: &RunOptions) -> Result<RunManifest, CliError> {
    s.validate()?;
    let stride = opts.stride.unwrap_or(s.record_stride);
    if stride < 1 {
        return Err(CliError::Usage("--stride must be >= 1".into()));
    }
    let started = Instant::now();
    let grid = build_grid(s)?;
    let cfg = build_config(s)?;
    let psi0 = build_state(&s.initial_state, grid, s.rng_seed, 0)?;
    let mut sink = Sink { dir: output_dir(s, opts), files: Vec::new() };
    sink.put("scenario.json", &s.to_json())?;
    let mut out = Outcome::default();

    match &s.task {
        Task::Propagate { dt, n_steps, scheme } => {
            let plan = PropagationPlan::new(*dt, *n_steps)
                .with_record_stride(stride)
                .with_scheme(match scheme {
                    SchemeSpec::CrankNicolson => Scheme::CrankNicolson,
                    SchemeSpec::SplitOperator => Scheme::SplitOperator,
                });
            let (traj, rows) = recorded_run(&cfg, &psi0, &plan)?;
            run_scalars(&mut out, &rows);
            out.check("finite", rows.iter().all(|r| r.values().iter().all(|v| v.is_finite())));
            sink.put("diagnostics.csv", &diagnostics_csv(&rows))?;
            if s.output.snapshots {
                sink.snapshots(&traj, stride)?;
            }
        }
        Task::GroundState { dt, tol, max_iter } => {
            let r = ground_state_imaginary_time(&cfg, &psi0, *dt, *tol, *max_iter)?;
            out.scalar("energy", r.energy);
            out.scalar("chemical_potential", r.chemical_potential);
            out.scalar("residual", r.residual);
            out.scalar("iterations", r.iterations as f64);
            out.check("ground_state", r.converged);
            sink.put("convergence.csv", &history_csv(&r.energy_history))?;
            if s.output.snapshots {
                sink.put("snapshots/ground_state.csv", &snapshot_csv(&r.state, r.iterations))?;
            }
        }
        Task::RayleighRitz { family, initial_params, max_iter, ftol, xtol, initial_step } => {
            let family = match family {
                TrialSpec::Gaussian => TrialFamily::gaussian(),
                TrialSpec::GaussianWithPhase => TrialFamily::gaussian_with_phase(),
                TrialSpec::BoxSine { left, right, modes } => TrialFamily::box_sine(*left, *right, *modes)?,
            };
            let nm = NelderMeadOptions {
                max_iter: *max_iter,
                ftol: *ftol,
                xtol: *xtol,
                initial_step: *initial_step,
                exec: Exec::Sequential,
            };
            let r = rayleigh_ritz_minimize(&cfg, &family, &grid, initial_params, &nm)?;
            out.scalar("energy", r.energy);
            out.scalar("iterations", r.iterations as f64);
            for (name, v) in family.parameter_names().iter().zip(&r.params) {
                out.scalar(&format!("param_{name}"), *v);
            }
            out.check("minimizer", r.converged);
            sink.put("convergence.csv", &history_csv(&r.history))?;
            if s.output.snapshots {
                sink.put("snapshots/trial_state.csv", &snapshot_csv(&r.state, r.iterations))?;
            }
        }
        Task::GpPropagate { dt, n_steps, nonlinear_update, start_from_ground_state, ground_dt, tol, max_iter } => {
            let mut start = psi0.clone();
            let mut relaxed = true;
            if *start_from_ground_state {
                let g = ground_state_imaginary_time(&cfg, &psi0, *ground_dt, *tol, *max_iter)?;
                out.scalar("ground_energy", g.energy);
                out.scalar("chemical_potential", g.chemical_potential);
                out.scalar("ground_iterations", g.iterations as f64);
                out.check("ground_state", g.converged);
                sink.put("convergence.csv", &history_csv(&g.energy_history))?;
                relaxed = g.converged;
                start = g.state.with_time(0.0);
            }
            if relaxed {
                let plan = PropagationPlan::new(*dt, *n_steps)
                    .with_record_stride(stride)
                    .with_nonlinear_update(match nonlinear_update {
                        UpdateSpec::PredictorCorrector => NonlinearUpdate::PredictorCorrector,
                        UpdateSpec::RecomputeEachHalfStep => NonlinearUpdate::RecomputeEachHalfStep,
                    });
                let (traj, rows) = recorded_run(&cfg, &start, &plan)?;
                run_scalars(&mut out, &rows);
                let e0 = rows[0].energy;
                out.scalar("energy_drift_relative", max_dev(&rows, |r| r.energy) / e0.abs().max(f64::MIN_POSITIVE));
                let rho0 = start.density();
                let sup = traj
                    .snapshots()
                    .iter()
                    .flat_map(|p| p.density().into_iter().zip(&rho0).map(|(a, b)| (a - b).abs()))
                    .fold(0.0f64, f64::max);
                out.scalar("density_drift_sup", sup);
                out.check("finite", rows.iter().all(|r| r.values().iter().all(|v| v.is_finite())));
                sink.put("diagnostics.csv", &diagnostics_csv(&rows))?;
                if s.output.snapshots {
                    sink.snapshots(&traj, stride)?;
                }
            }
        }
        Task::Verify { dt, n_steps, action, perturbation, epsilons, thresholds } => {
            let plan = PropagationPlan::new(*dt, *n_steps);
            let (full, rows) = recorded_run(&cfg, &psi0, &plan)?;
            run_scalars(&mut out, &rows);
            let last = rows[rows.len() - 1];
            let gap = (last.action_simple_running - last.action_standard_running).abs();
            out.scalar("action_gap", gap);
            let eta = build_state(perturbation, grid, s.rng_seed, 1)?;
            let which = match action {
                ActionSpec::Simple => ActionDensity::Simple,
                ActionSpec::Standard => ActionDensity::Standard,
            };
            let report = stationarity_test_with(&cfg, &full, &eta, epsilons, which, Exec::Sequential)?;
            let slope = report.slope.unwrap_or(f64::NAN);
            out.scalar("stationarity_slope", slope);
            let mut table = String::from("epsilon,delta_s\n");
            for (e, d) in &report.samples {
                table.push_str(&format!("{},{}\n", num(*e), num(*d)));
            }
            sink.put("stationarity.csv", &table)?;
            verify_checks(&mut out, &rows, gap, slope, thresholds);
            sink.put("diagnostics.csv", &diagnostics_csv(&rows))?;
            if s.output.snapshots {
                let picked: Vec<Wavefunction> =
                    full.snapshots().iter().step_by(stride).cloned().collect();
                sink.snapshots(&Trajectory::from_snapshots(picked, stride)?, stride)?;
            }
        }
    }

    sink.put("summary.csv", &summary_csv(&out.summary))?;
    let mut flags = BTreeMap::new();
    flags.insert("quiet".to_string(), opts.quiet.to_string());
    flags.insert("stride_override".to_string(), opts.stride.map_or("none".into(), |k| k.to_string()));
    flags.insert("parallel_feature".to_string(), cfg!(feature = "parallel").to_string());
    let mut manifest = RunManifest {
        scenario_name: s.name.clone(),
        task: s.task.label().to_string(),
        scenario_hash: scenario_hash(s),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        record_stride: stride,
        flags,
        converged: out.checks.values().all(|ok| *ok),
        checks: out.checks,
        summary: out.summary.into_iter().collect(),
        files: Vec::new(),
    };
    sink.files.push("manifest.json".into());
    manifest.files = sink.files.clone();
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&sink.dir.join("manifest.json"), json.as_bytes())?;
    Ok(manifest)
}

fn recorded_run(
    cfg: &HamiltonianConfig,
    psi0: &Wavefunction,
    plan: &PropagationPlan,
) -> Result<(Trajectory, Vec<DiagnosticsRecord>), CliError> {
    let mut rec = DiagnosticsRecorder::new(cfg);
    let traj = propagate(cfg, psi0, plan, &mut [&mut rec])?;
    Ok((traj, rec.into_records()))
}

fn max_dev(rows: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    let base = f(&rows[0]);
    rows.iter().map(|r| (f(r) - base).abs()).fold(0.0, f64::max)
}

fn max_of(rows: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    rows.iter().map(f).fold(0.0, f64::max)
}

fn run_scalars(out: &mut Outcome, rows: &[DiagnosticsRecord]) {
    let last = rows[rows.len() - 1];
    out.scalar("final_time", last.time);
    out.scalar("final_energy", last.energy);
    out.scalar("final_norm", last.norm);
    out.scalar("energy_drift", max_dev(rows, |r| r.energy));
    out.scalar("norm_drift", max_dev(rows, |r| r.norm));
    out.scalar("continuity_sup_max", max_of(rows, |r| r.continuity_sup));
    out.scalar("continuity_l2_max", max_of(rows, |r| r.continuity_l2));
    out.scalar("hamilton_r1_max", max_of(rows, |r| r.hamilton_r1));
    out.scalar("action_simple", last.action_simple_running);
    out.scalar("action_standard", last.action_standard_running);
}

fn verify_checks(out: &mut Outcome, rows: &[DiagnosticsRecord], gap: f64, slope: f64, t: &Thresholds) {
    out.check("norm_drift", max_dev(rows, |r| r.norm) < t.norm_drift);
    out.check("continuity_sup", max_of(rows, |r| r.continuity_sup) < t.continuity_sup);
    out.check("action_gap", gap < t.action_gap);
    out.check("hamilton_r1", max_of(rows, |r| r.hamilton_r1) < t.hamilton_r1);
    out.check("stationarity_slope", (slope - t.slope_target).abs() <= t.slope_tolerance);
}

/// Scenario files (`*.json`) directly inside `dir`, sorted by name.
pub fn batch_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
