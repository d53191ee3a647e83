//! Lagrangian densities, action functionals, stationarity checks and
//! Rayleigh-Ritz minimization.
//!
//! Trajectories are integrated interval by interval with the midpoint rule:
//! on `[t_n, t_{n+1}]` the state is `ψ̄ = (ψ_n + ψ_{n+1})/2`, its rate is
//! `(ψ_{n+1} − ψ_n)/Δt` and fields are evaluated at the interval midpoint.
//! Crank-Nicolson output is then an exact stationary point of the discrete
//! action.

mod nelder_mead;
mod ritz;
mod trial;

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use ritz::{rayleigh_ritz_minimize, RitzResult};
pub use trial::{BuildFn, TrialFamily};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::Grid;
use crate::hamiltonian::{
    diagonal_potential, hamiltonian_matrix, kinetic_links, mean_field_from_density, HamiltonianConfig,
    Link,
};
use crate::linalg::BandMatrix;
use crate::propagation::Trajectory;
use crate::wavefunction::{same_grid, Wavefunction};

/// Pointwise Lagrangian densities at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSample {
    grid: Grid,
    /// ψ*(iħ∂ₜ − Ĥ)ψ.
    pub l_simple: Vec<Complex64>,
    /// The manifestly real first-order density.
    pub l_standard: Vec<f64>,
    /// `Re l_simple − l_standard`, a discrete total derivative.
    pub divergence_term: Vec<f64>,
    pub time: f64,
}

impl LagrangianSample {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Re ψ*(iħ∂ₜ − Ĥ)ψ.
    pub fn sil(&self) -> Vec<f64> {
        self.l_simple.iter().map(|l| l.re).collect()
    }

    pub fn integrated_simple(&self) -> Complex64 {
        self.l_simple.iter().enumerate().map(|(j, l)| self.grid.weight(j) * l).sum()
    }

    pub fn integrated_standard(&self) -> f64 {
        self.grid.integrate(&self.l_standard)
    }

    pub fn integrated_divergence(&self) -> f64 {
        self.grid.integrate(&self.divergence_term)
    }
}

/// Linear operator pieces at one time.
struct Frame {
    h: BandMatrix,
    links: Vec<Link>,
    diag: Vec<f64>,
}

impl Frame {
    fn new(cfg: &HamiltonianConfig, grid: &Grid, t: f64) -> Result<Self> {
        Ok(Self {
            h: hamiltonian_matrix(cfg, grid, t, None)?,
            links: kinetic_links(cfg, grid, t)?,
            diag: diagonal_potential(cfg, grid, t, None)?,
        })
    }
}

fn sample(
    cfg: &HamiltonianConfig,
    frame: &Frame,
    grid: &Grid,
    psi: &[Complex64],
    dpsi: &[Complex64],
    t: f64,
) -> Result<LagrangianSample> {
    let n = grid.len();
    let hbar = cfg.constants.hbar;
    let rho: Vec<f64> = psi.iter().map(Complex64::norm_sqr).collect();
    let half_field = match &cfg.interaction {
        Some(int) => {
            let mut u = mean_field_from_density(int, grid, &rho, Exec::Sequential)?;
            u.iter_mut().for_each(|v| *v *= 0.5);
            u
        }
        None => vec![0.0; n],
    };
    let h_psi = frame.h.matvec(psi);
    let i_hbar = Complex64::new(0.0, hbar);
    let l_simple: Vec<Complex64> = (0..n)
        .map(|j| psi[j].conj() * (i_hbar * dpsi[j] - h_psi[j] - half_field[j] * psi[j]))
        .collect();

    let mut kinetic = vec![0.0; n];
    let mut divergence = vec![0.0; n];
    let value = |node: Option<usize>| node.map_or(Complex64::new(0.0, 0.0), |j| psi[j]);
    for l in &frame.links {
        let term = l.coupling * (l.phase * value(l.b_node) - value(l.a_node)).norm_sqr();
        match (l.a_node, l.b_node) {
            (Some(a), Some(b)) => {
                kinetic[a] += 0.5 * term;
                kinetic[b] += 0.5 * term;
                let flow = 0.5 * l.coupling * (rho[b] - rho[a]);
                divergence[a] += flow;
                divergence[b] -= flow;
            }
            (Some(j), None) | (None, Some(j)) => kinetic[j] += term,
            (None, None) => {}
        }
    }
    let dx = grid.dx();
    for j in 0..n {
        let cell = grid.weight(j) / dx;
        kinetic[j] /= cell;
        divergence[j] /= cell;
    }
    let l_standard = (0..n)
        .map(|j| {
            -hbar * (psi[j].conj() * dpsi[j]).im - kinetic[j] - (frame.diag[j] + half_field[j]) * rho[j]
        })
        .collect();
    Ok(LagrangianSample { grid: *grid, l_simple, l_standard, divergence_term: divergence, time: t })
}

/// Both densities for a state and an externally supplied rate `∂ₜψ`.
/// Interactions enter at the half weight of the energy functional.
pub fn lagrangian_densities(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    dpsi_dt: &Wavefunction,
    t: f64,
) -> Result<LagrangianSample> {
    same_grid(psi, dpsi_dt)?;
    let grid = *psi.grid();
    let frame = Frame::new(cfg, &grid, t)?;
    sample(cfg, &frame, &grid, psi.amplitudes(), dpsi_dt.amplitudes(), t)
}

/// Which Lagrangian density an action integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionDensity {
    #[default]
    Simple,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    /// Real part of the action.
    pub value: f64,
    /// Imaginary part; identically zero for the standard density.
    pub imaginary: f64,
    pub window: (f64, f64),
    pub dt: f64,
    pub which: ActionDensity,
}

impl ActionValue {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.value, self.imaginary)
    }
}

/// Contribution of one interval to both actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionIncrement {
    pub simple: Complex64,
    pub standard: f64,
}

fn interval(
    cfg: &HamiltonianConfig,
    frame: &Frame,
    a: &Wavefunction,
    b: &Wavefunction,
) -> Result<ActionIncrement> {
    let grid = *a.grid();
    let dt = b.time() - a.time();
    if dt == 0.0 {
        return Err(Error::IdenticalTimes(a.time()));
    }
    let (pa, pb) = (a.amplitudes(), b.amplitudes());
    let mid: Vec<Complex64> = pa.iter().zip(pb).map(|(x, y)| 0.5 * (x + y)).collect();
    let rate: Vec<Complex64> = pa.iter().zip(pb).map(|(x, y)| (y - x) / dt).collect();
    let s = sample(cfg, frame, &grid, &mid, &rate, a.time() + 0.5 * dt)?;
    Ok(ActionIncrement {
        simple: s.integrated_simple() * dt,
        standard: s.integrated_standard() * dt,
    })
}

/// Action accumulated between two consecutive states.
pub fn action_increment(
    cfg: &HamiltonianConfig,
    before: &Wavefunction,
    after: &Wavefunction,
) -> Result<ActionIncrement> {
    same_grid(before, after)?;
    let t = 0.5 * (before.time() + after.time());
    interval(cfg, &Frame::new(cfg, before.grid(), t)?, before, after)
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::TooFewSnapshots { needed: 2, got: times.len() });
    }
    let dt = times[1] - times[0];
    if dt == 0.0 {
        return Err(Error::IdenticalTimes(times[0]));
    }
    let scale = times.iter().fold(dt.abs(), |m, t| m.max(t.abs()));
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * scale) {
        return Err(Error::NonUniformTimes);
    }
    Ok(dt)
}

fn summed(cfg: &HamiltonianConfig, states: &[Wavefunction], exec: Exec) -> Result<ActionIncrement> {
    let grid = *states[0].grid();
    let shared = if cfg.is_static() { Some(Frame::new(cfg, &grid, states[0].time())?) } else { None };
    let parts = exec.map_range(states.len() - 1, |i| {
        let (a, b) = (&states[i], &states[i + 1]);
        match &shared {
            Some(f) => interval(cfg, f, a, b),
            None => interval(cfg, &Frame::new(cfg, &grid, 0.5 * (a.time() + b.time()))?, a, b),
        }
    });
    let mut total = ActionIncrement { simple: Complex64::new(0.0, 0.0), standard: 0.0 };
    for p in parts {
        let p = p?;
        total.simple += p.simple;
        total.standard += p.standard;
    }
    Ok(total)
}

/// Action of a recorded trajectory over its time window. Needs at least two
/// snapshots at a uniform spacing.
pub fn action(cfg: &HamiltonianConfig, traj: &Trajectory, which: ActionDensity) -> Result<ActionValue> {
    action_with(cfg, traj, which, Exec::default())
}

/// [`action`] with an explicit execution mode for the per-interval sums.
pub fn action_with(
    cfg: &HamiltonianConfig,
    traj: &Trajectory,
    which: ActionDensity,
    exec: Exec,
) -> Result<ActionValue> {
    let states = traj.snapshots();
    let dt = uniform_step(&traj.times())?;
    let total = summed(cfg, states, exec)?;
    let (value, imaginary) = match which {
        ActionDensity::Simple => (total.simple.re, total.simple.im),
        ActionDensity::Standard => (total.standard, 0.0),
    };
    if !value.is_finite() || !imaginary.is_finite() {
        return Err(Error::NonFinite("action".into()));
    }
    Ok(ActionValue {
        value,
        imaginary,
        window: (states[0].time(), states[states.len() - 1].time()),
        dt,
        which,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// (ε, |S[ψ + εη] − S[ψ]|) in input order.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of ln|ΔS| against ln|ε| over the nonzero samples.
    pub slope: Option<f64>,
}

/// Temporal envelope vanishing at both ends of the window.
fn bump(t: f64, t0: f64, t1: f64) -> f64 {
    if t <= t0 || t >= t1 {
        0.0
    } else {
        (std::f64::consts::PI * (t - t0) / (t1 - t0)).sin()
    }
}

/// Perturb every snapshot by `ε·sin(π(t − t₀)/(t₁ − t₀))·η(x)` and report
/// how the action changes. Solutions give a slope near 2.
pub fn stationarity_test(
    cfg: &HamiltonianConfig,
    traj: &Trajectory,
    perturbation: &Wavefunction,
    epsilons: &[f64],
    which: ActionDensity,
) -> Result<StationarityReport> {
    stationarity_test_with(cfg, traj, perturbation, epsilons, which, Exec::default())
}

/// [`stationarity_test`] with an explicit execution mode for the ε sweep.
pub fn stationarity_test_with(
    cfg: &HamiltonianConfig,
    traj: &Trajectory,
    perturbation: &Wavefunction,
    epsilons: &[f64],
    which: ActionDensity,
    exec: Exec,
) -> Result<StationarityReport> {
    let states = traj.snapshots();
    uniform_step(&traj.times())?;
    same_grid(&states[0], perturbation)?;
    let mut distinct: Vec<f64> = epsilons.iter().map(|e| e.abs()).filter(|e| *e > 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 || epsilons.iter().any(|e| !e.is_finite()) {
        return Err(Error::DegenerateEpsilons);
    }
    let (t0, t1) = (states[0].time(), states[states.len() - 1].time());
    let pick = |s: ActionIncrement| match which {
        ActionDensity::Simple => s.simple,
        ActionDensity::Standard => Complex64::new(s.standard, 0.0),
    };
    let base = pick(summed(cfg, states, Exec::Sequential)?);
    let deltas = exec.map(epsilons, |&eps| -> Result<f64> {
        if eps == 0.0 {
            return Ok(0.0);
        }
        let moved = states
            .iter()
            .map(|s| s.add_scaled(Complex64::new(eps * bump(s.time(), t0, t1), 0.0), perturbation))
            .collect::<Result<Vec<_>>>()?;
        Ok((pick(summed(cfg, &moved, Exec::Sequential)?) - base).norm())
    });
    let samples = epsilons
        .iter()
        .zip(deltas)
        .map(|(e, d)| Ok((*e, d?)))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(e, d)| *e != 0.0 && *d > 0.0)
        .map(|(e, d)| (e.abs().ln(), d.ln()))
        .collect();
    Ok(StationarityReport { slope: log_slope(&points), samples })
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};
    use crate::hamiltonian::{apply_hamiltonian, PotentialField};
    use crate::wavefunction::normalize;

    fn ground(n: usize, dx_box: f64) -> Wavefunction {
        let g = make_grid(-dx_box, dx_box, n, Boundary::Dirichlet).unwrap();
        normalize(&Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap())
            .unwrap()
    }

    #[test]
    fn stationary_state_density_is_small() {
        let psi = ground(2001, 10.0);
        let cfg = HamiltonianConfig::default().with_potential(PotentialField::harmonic(1.0, 1.0, 0.0));
        let rate = psi.scaled(Complex64::new(0.0, -0.5));
        let s = lagrangian_densities(&cfg, &psi, &rate, 0.0).unwrap();
        let sup = s.l_simple.iter().fold(0.0f64, |m, l| m.max(l.norm()));
        assert!(sup < 1e-4, "{sup}");
    }

    #[test]
    fn frozen_free_state_gives_minus_energy_density() {
        let g = make_grid(-5.0, 5.0, 64, Boundary::Dirichlet).unwrap();
        let psi = Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), 0.3 * x)).unwrap();
        let cfg = HamiltonianConfig::default();
        let s = lagrangian_densities(&cfg, &psi, &Wavefunction::zeros(g, 0.0), 0.0).unwrap();
        let h = apply_hamiltonian(&cfg, &psi, 0.0, None).unwrap();
        for j in 0..64 {
            let expect = -psi.amplitudes()[j].conj() * h.amplitudes()[j];
            assert!((s.l_simple[j] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn pointwise_identity_holds() {
        let g = make_grid(-3.0, 3.0, 50, Boundary::Dirichlet).unwrap();
        let psi = Wavefunction::from_fn(g, 0.0, |x| Complex64::new(x.cos(), (2.0 * x).sin())).unwrap();
        let rate = Wavefunction::from_fn(g, 0.0, |x| Complex64::new(x, 1.0)).unwrap();
        let cfg = HamiltonianConfig::default()
            .with_potential(PotentialField::Quartic { strength: 0.2, center: 0.0 })
            .with_vector_potential(PotentialField::time_dependent(|x, _| 0.5 * x))
            .with_stencil(crate::KineticStencil::FourthOrder);
        let s = lagrangian_densities(&cfg, &psi, &rate, 0.0).unwrap();
        for j in 0..50 {
            assert!((s.l_simple[j].re - s.l_standard[j] - s.divergence_term[j]).abs() < 1e-10);
        }
        assert!(s.integrated_divergence().abs() < 1e-10);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3].iter().map(|e: &f64| (e.ln(), (3.0 * e * e).ln())).collect();
        assert!((log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn bump_vanishes_at_ends() {
        assert_eq!(bump(0.0, 0.0, 1.0), 0.0);
        assert_eq!(bump(1.0, 0.0, 1.0), 0.0);
        assert!((bump(0.5, 0.0, 1.0) - 1.0).abs() < 1e-15);
    }
}
