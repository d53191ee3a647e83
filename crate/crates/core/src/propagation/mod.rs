//! Time evolution: Crank-Nicolson, Gross-Pitaevskii predictor-corrector,
//! split-operator and imaginary-time relaxation.

mod imaginary;
mod split;

pub use imaginary::{ground_state_imaginary_time, GroundStateResult};
pub use split::step_split_operator;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::Grid;
use crate::hamiltonian::{hamiltonian_matrix, mean_field_from_density, HamiltonianConfig};
use crate::linalg::{BandMatrix, Factorization};
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    CrankNicolson,
    /// Strang splitting with FFT kinetics; periodic grids, `A = 0` only.
    SplitOperator,
}

/// How the mean field follows the evolving orbital within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonlinearUpdate {
    #[default]
    None,
    /// Frozen-field half step to the midpoint, then a full step with the
    /// midpoint field.
    RecomputeEachHalfStep,
    /// Frozen-field predictor, then a corrector with the field of the
    /// averaged density.
    PredictorCorrector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub dt: f64,
    pub t_start: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub nonlinear_update: NonlinearUpdate,
    pub record_stride: usize,
}

impl PropagationPlan {
    pub fn new(dt: f64, n_steps: usize) -> Self {
        Self {
            dt,
            t_start: 0.0,
            n_steps,
            scheme: Scheme::CrankNicolson,
            nonlinear_update: NonlinearUpdate::None,
            record_stride: 1,
        }
    }

    pub fn starting_at(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_nonlinear_update(mut self, update: NonlinearUpdate) -> Self {
        self.nonlinear_update = update;
        self
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    /// Time after `k` steps.
    pub fn time_at(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn validate(&self, cfg: &HamiltonianConfig) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !self.t_start.is_finite() {
            return Err(Error::InvalidParameter("t_start must be finite".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        match (cfg.interaction.is_some(), self.nonlinear_update) {
            (true, NonlinearUpdate::None) => Err(Error::InvalidParameter(
                "an interaction is configured but nonlinear_update is none".into(),
            )),
            (false, u) if u != NonlinearUpdate::None => Err(Error::InvalidParameter(
                "nonlinear_update requires a configured interaction".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Recorded states of one run; times strictly increase.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<Wavefunction>,
    record_stride: usize,
}

impl Trajectory {
    /// Wrap states supplied by the caller.
    pub fn from_snapshots(snapshots: Vec<Wavefunction>, record_stride: usize) -> Result<Self> {
        if record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        for w in snapshots.windows(2) {
            if w[0].grid() != w[1].grid() {
                return Err(Error::GridMismatch);
            }
            if !(w[1].time() > w[0].time()) {
                return Err(Error::InvalidParameter(format!(
                    "snapshot times must increase: {} then {}",
                    w[0].time(),
                    w[1].time()
                )));
            }
        }
        Ok(Self { snapshots, record_stride })
    }

    pub fn snapshots(&self) -> &[Wavefunction] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<Wavefunction> {
        self.snapshots
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Wavefunction::time).collect()
    }

    pub fn first(&self) -> Option<&Wavefunction> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&Wavefunction> {
        self.snapshots.last()
    }
}

/// One completed step as seen by observers.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    /// 1-based index of the step just taken.
    pub step: usize,
    pub before: &'a Wavefunction,
    pub after: &'a Wavefunction,
}

/// Per-step callback; an `Err` aborts the run.
pub trait Observer {
    /// Called once with the initial state before any step.
    fn start(&mut self, _psi0: &Wavefunction) -> std::result::Result<(), String> {
        Ok(())
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String>;
}

impl<F> Observer for F
where
    F: FnMut(&StepView<'_>) -> std::result::Result<(), String>,
{
    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        self(view)
    }
}

/// Solve `(I + i dt/2ħ H) ψ' = (I − i dt/2ħ H) ψ`.
fn cayley_matrices(h: &BandMatrix, dt: f64, hbar: f64) -> (BandMatrix, BandMatrix) {
    let one = Complex64::new(1.0, 0.0);
    let c = Complex64::new(0.0, 0.5 * dt / hbar);
    (h.shifted(one, c), h.shifted(one, -c))
}

fn cayley_step(h: &BandMatrix, psi: &[Complex64], dt: f64, hbar: f64) -> Result<Vec<Complex64>> {
    let (lhs, rhs) = cayley_matrices(h, dt, hbar);
    let mut b = rhs.matvec(psi);
    lhs.factor()?.solve_in_place(&mut b);
    Ok(b)
}

fn finite_state(grid: Grid, amps: Vec<Complex64>, time: f64) -> Result<Wavefunction> {
    let psi = Wavefunction::from_parts(grid, amps, time);
    if !psi.is_finite() {
        return Err(Error::NonFinite(format!("state at t = {time}")));
    }
    Ok(psi)
}

/// One Crank-Nicolson step of the linear Hamiltonian evaluated at `t + dt/2`.
pub fn step_crank_nicolson(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    t: f64,
    dt: f64,
) -> Result<Wavefunction> {
    if cfg.interaction.is_some() {
        return Err(Error::InvalidParameter(
            "Crank-Nicolson step needs a linear Hamiltonian; use step_gp".into(),
        ));
    }
    let grid = *psi.grid();
    let h = hamiltonian_matrix(cfg, &grid, t + 0.5 * dt, None)?;
    finite_state(grid, cayley_step(&h, psi.amplitudes(), dt, cfg.constants.hbar)?, t + dt)
}

/// One nonlinear Crank-Nicolson step with the mean field rebuilt from the
/// evolving orbital as selected by `plan.nonlinear_update`.
pub fn step_gp(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    t: f64,
    dt: f64,
    plan: &PropagationPlan,
) -> Result<Wavefunction> {
    let int = cfg
        .interaction
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("step_gp needs a configured interaction".into()))?;
    let grid = *psi.grid();
    let hbar = cfg.constants.hbar;
    let exec = Exec::default();
    let field = |density: &[f64]| mean_field_from_density(int, &grid, density, exec);
    let rho0 = psi.density();
    let tm = t + 0.5 * dt;
    let u0 = field(&rho0)?;
    let out = match plan.nonlinear_update {
        NonlinearUpdate::None => {
            return Err(Error::InvalidParameter("step_gp needs a nonlinear update rule".into()))
        }
        NonlinearUpdate::PredictorCorrector => {
            let h0 = hamiltonian_matrix(cfg, &grid, tm, Some(&u0))?;
            let pred = cayley_step(&h0, psi.amplitudes(), dt, hbar)?;
            let avg: Vec<f64> =
                pred.iter().zip(&rho0).map(|(p, r)| 0.5 * (p.norm_sqr() + r)).collect();
            let h1 = hamiltonian_matrix(cfg, &grid, tm, Some(&field(&avg)?))?;
            cayley_step(&h1, psi.amplitudes(), dt, hbar)?
        }
        NonlinearUpdate::RecomputeEachHalfStep => {
            let h0 = hamiltonian_matrix(cfg, &grid, t + 0.25 * dt, Some(&u0))?;
            let half = cayley_step(&h0, psi.amplitudes(), 0.5 * dt, hbar)?;
            let rho_half: Vec<f64> = half.iter().map(Complex64::norm_sqr).collect();
            let h1 = hamiltonian_matrix(cfg, &grid, tm, Some(&field(&rho_half)?))?;
            cayley_step(&h1, psi.amplitudes(), dt, hbar)?
        }
    };
    finite_state(grid, out, t + dt)
}

/// Reuses one factorization across steps when the Hamiltonian is linear and
/// static.
struct LinearStepper {
    cached: Option<(BandMatrix, Factorization)>,
}

impl LinearStepper {
    fn new(cfg: &HamiltonianConfig, grid: &Grid, plan: &PropagationPlan) -> Result<Self> {
        let cached = if cfg.is_static() && cfg.interaction.is_none() {
            let h = hamiltonian_matrix(cfg, grid, plan.t_start, None)?;
            let (lhs, rhs) = cayley_matrices(&h, plan.dt, cfg.constants.hbar);
            Some((rhs, lhs.factor()?))
        } else {
            None
        };
        Ok(Self { cached })
    }

    fn step(&self, cfg: &HamiltonianConfig, psi: &Wavefunction, t: f64, dt: f64) -> Result<Wavefunction> {
        match &self.cached {
            Some((rhs, lu)) => {
                let mut b = rhs.matvec(psi.amplitudes());
                lu.solve_in_place(&mut b);
                finite_state(*psi.grid(), b, t + dt)
            }
            None => step_crank_nicolson(cfg, psi, t, dt),
        }
    }
}

/// Evolve `psi0` through `plan`, recording every `record_stride`-th state
/// and calling each observer after every step.
pub fn propagate(
    cfg: &HamiltonianConfig,
    psi0: &Wavefunction,
    plan: &PropagationPlan,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    cfg.validate()?;
    plan.validate(cfg)?;
    let norm2 = psi0.norm_squared();
    if (norm2 - 1.0).abs() > 1e-8 {
        log::warn!("propagating a state with norm² = {norm2}");
    }
    let grid = *psi0.grid();
    let stepper = match (plan.scheme, cfg.interaction.is_some()) {
        (Scheme::CrankNicolson, false) => Some(LinearStepper::new(cfg, &grid, plan)?),
        _ => None,
    };
    let mut current = psi0.clone().with_time(plan.t_start);
    for obs in observers.iter_mut() {
        obs.start(&current).map_err(|message| Error::Observer { step: 0, time: plan.t_start, message })?;
    }
    let mut snapshots = vec![current.clone()];
    for k in 1..=plan.n_steps {
        let t = plan.time_at(k - 1);
        let next = match (plan.scheme, &stepper) {
            (Scheme::CrankNicolson, Some(s)) => s.step(cfg, &current, t, plan.dt)?,
            (Scheme::CrankNicolson, None) => step_gp(cfg, &current, t, plan.dt, plan)?,
            (Scheme::SplitOperator, _) => step_split_operator(cfg, &current, t, plan.dt)?,
        }
        .with_time(plan.time_at(k));
        let view = StepView { step: k, before: &current, after: &next };
        for obs in observers.iter_mut() {
            obs.observe(&view)
                .map_err(|message| Error::Observer { step: k, time: next.time(), message })?;
        }
        if k % plan.record_stride == 0 {
            snapshots.push(next.clone());
        }
        current = next;
    }
    Ok(Trajectory { snapshots, record_stride: plan.record_stride })
}
