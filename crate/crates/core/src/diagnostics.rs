//! Conservation-law and canonical-formalism checks.

use num_complex::Complex64;

use crate::calculus::derivative_real;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamiltonian::{
    apply_mechanical_momentum, energy, hamiltonian_matrix, mean_field_from_density, HamiltonianConfig,
};
use crate::propagation::{Observer, StepView};
use crate::variational::action_increment;
use crate::wavefunction::{same_grid, weighted_dot, Wavefunction};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityFields {
    pub rho: Vec<f64>,
    pub current: Vec<f64>,
    pub time: f64,
}

/// ρ = |ψ|² and J = Re[ψ*·P̂ψ/m].
pub fn probability_fields(cfg: &HamiltonianConfig, psi: &Wavefunction, t: f64) -> Result<ProbabilityFields> {
    let p = apply_mechanical_momentum(cfg, psi, t)?;
    let m = cfg.constants.mass;
    let current = psi
        .amplitudes()
        .iter()
        .zip(p.amplitudes())
        .map(|(a, b)| (a.conj() * b).re / m)
        .collect();
    Ok(ProbabilityFields { rho: psi.density(), current, time: t })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub residual: Vec<f64>,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub dt_used: f64,
}

fn time_step(before: &Wavefunction, after: &Wavefunction) -> Result<f64> {
    same_grid(before, after)?;
    let dt = after.time() - before.time();
    if dt == 0.0 {
        return Err(Error::IdenticalTimes(before.time()));
    }
    Ok(dt)
}

/// `(ρ_after − ρ_before)/dt + ∂ₓJ` with J taken at the arithmetic-mean state
/// and the mid-step time.
pub fn continuity_residual(
    cfg: &HamiltonianConfig,
    psi_before: &Wavefunction,
    psi_after: &Wavefunction,
) -> Result<ContinuityReport> {
    let dt = time_step(psi_before, psi_after)?;
    let grid = *psi_before.grid();
    let tm = psi_before.time() + 0.5 * dt;
    let mid = Wavefunction::midpoint(psi_before, psi_after)?.with_time(tm);
    let div = derivative_real(&grid, &probability_fields(cfg, &mid, tm)?.current);
    let (ra, rb) = (psi_before.density(), psi_after.density());
    let residual: Vec<f64> = (0..grid.len()).map(|j| (rb[j] - ra[j]) / dt + div[j]).collect();
    let sup_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let sq: Vec<f64> = residual.iter().map(|r| r * r).collect();
    let l2_norm = grid.integrate(&sq).sqrt();
    Ok(ContinuityReport { residual, sup_norm, l2_norm, dt_used: dt })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFields {
    /// Π = iħψ*.
    pub pi: Vec<Complex64>,
    /// (1/iħ)∫Π Ĥψ dx, with any mean field at half weight.
    pub hamiltonian_functional: f64,
}

/// Half-weight mean field of `psi`, if an interaction is configured.
fn half_field(cfg: &HamiltonianConfig, psi: &Wavefunction) -> Result<Option<Vec<f64>>> {
    cfg.interaction
        .as_ref()
        .map(|int| {
            mean_field_from_density(int, psi.grid(), &psi.density(), Exec::default())
                .map(|u| u.into_iter().map(|v| 0.5 * v).collect())
        })
        .transpose()
}

pub fn canonical_fields(cfg: &HamiltonianConfig, psi: &Wavefunction, t: f64) -> Result<CanonicalFields> {
    let hbar = cfg.constants.hbar;
    let i_hbar = Complex64::new(0.0, hbar);
    let pi: Vec<Complex64> = psi.amplitudes().iter().map(|a| i_hbar * a.conj()).collect();
    debug_assert!(pi.iter().zip(psi.amplitudes()).all(|(p, a)| *p == i_hbar * a.conj()));
    let u = half_field(cfg, psi)?;
    let h_psi = hamiltonian_matrix(cfg, psi.grid(), t, u.as_deref())?.matvec(psi.amplitudes());
    let grid = psi.grid();
    let integral: Complex64 = pi.iter().zip(&h_psi).enumerate().map(|(j, (p, h))| grid.weight(j) * p * h).sum();
    Ok(CanonicalFields { pi, hamiltonian_functional: (integral / i_hbar).re })
}

/// Residuals of Hamilton's two field equations between consecutive states.
///
/// `r1 = ‖∂ₜψ − Ĥψ_m/iħ‖` and `r2 = ‖∂ₜΠ + (Ĥψ_m)*‖/ħ` with Π = iħψ*. The
/// midpoint `ψ_m` is the mean of the two states rescaled to their mean norm,
/// which puts it on the solution manifold up to O(dt²).
pub fn hamilton_equations_residual(
    cfg: &HamiltonianConfig,
    psi_before: &Wavefunction,
    psi_after: &Wavefunction,
) -> Result<(f64, f64)> {
    let dt = time_step(psi_before, psi_after)?;
    let grid = *psi_before.grid();
    let hbar = cfg.constants.hbar;
    let tm = psi_before.time() + 0.5 * dt;
    let mean = Wavefunction::midpoint(psi_before, psi_after)?.with_time(tm);
    let target = 0.5 * (psi_before.norm() + psi_after.norm());
    let scale = if mean.norm() > 0.0 { target / mean.norm() } else { 1.0 };
    let mid = mean.scaled(Complex64::new(scale, 0.0));
    let u = cfg
        .interaction
        .as_ref()
        .map(|int| mean_field_from_density(int, &grid, &mid.density(), Exec::default()))
        .transpose()?;
    let h_mid = hamiltonian_matrix(cfg, &grid, tm, u.as_deref())?.matvec(mid.amplitudes());
    let (a, b) = (psi_before.amplitudes(), psi_after.amplitudes());
    let i_hbar = Complex64::new(0.0, hbar);
    let res1: Vec<Complex64> = (0..grid.len()).map(|j| (b[j] - a[j]) / dt - h_mid[j] / i_hbar).collect();
    let res2: Vec<Complex64> = (0..grid.len())
        .map(|j| (i_hbar * b[j].conj() - i_hbar * a[j].conj()) / dt + h_mid[j].conj())
        .collect();
    let norm = |r: &[Complex64]| weighted_dot(&grid, r, r).re.sqrt();
    Ok((norm(&res1), norm(&res2) / hbar))
}

/// Global phase change ψ → e^{iδΓ/ħ}ψ.
pub fn gauge_transform(psi: &Wavefunction, delta_gamma: f64, hbar: f64) -> Wavefunction {
    psi.scaled(Complex64::from_polar(1.0, delta_gamma / hbar))
}

/// One diagnostics row per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
    pub continuity_sup: f64,
    pub continuity_l2: f64,
    pub action_simple_running: f64,
    pub action_standard_running: f64,
    pub hamilton_r1: f64,
}

impl DiagnosticsRecord {
    /// Column order of the serialized form.
    pub const COLUMNS: [&'static str; 9] = [
        "step",
        "time",
        "norm",
        "energy",
        "continuity_sup",
        "continuity_l2",
        "action_simple_running",
        "action_standard_running",
        "hamilton_r1",
    ];

    /// Real-valued columns after `step`, in [`Self::COLUMNS`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.time,
            self.norm,
            self.energy,
            self.continuity_sup,
            self.continuity_l2,
            self.action_simple_running,
            self.action_standard_running,
            self.hamilton_r1,
        ]
    }
}

/// Observer that fills one [`DiagnosticsRecord`] per step; step 0 holds the
/// initial state with zero residuals.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecorder {
    cfg: HamiltonianConfig,
    records: Vec<DiagnosticsRecord>,
    action_simple: f64,
    action_standard: f64,
}

impl DiagnosticsRecorder {
    pub fn new(cfg: &HamiltonianConfig) -> Self {
        Self { cfg: cfg.clone(), records: Vec::new(), action_simple: 0.0, action_standard: 0.0 }
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }

    fn record(&mut self, view: &StepView<'_>) -> Result<DiagnosticsRecord> {
        let (a, b) = (view.before, view.after);
        let cont = continuity_residual(&self.cfg, a, b)?;
        let inc = action_increment(&self.cfg, a, b)?;
        self.action_simple += inc.simple.re;
        self.action_standard += inc.standard;
        let (r1, _) = hamilton_equations_residual(&self.cfg, a, b)?;
        Ok(DiagnosticsRecord {
            step: view.step,
            time: b.time(),
            norm: b.norm(),
            energy: energy(&self.cfg, b, b.time())?,
            continuity_sup: cont.sup_norm,
            continuity_l2: cont.l2_norm,
            action_simple_running: self.action_simple,
            action_standard_running: self.action_standard,
            hamilton_r1: r1,
        })
    }
}

impl Observer for DiagnosticsRecorder {
    fn start(&mut self, psi0: &Wavefunction) -> std::result::Result<(), String> {
        self.records.clear();
        self.action_simple = 0.0;
        self.action_standard = 0.0;
        let e = energy(&self.cfg, psi0, psi0.time()).map_err(|e| e.to_string())?;
        self.records.push(DiagnosticsRecord {
            step: 0,
            time: psi0.time(),
            norm: psi0.norm(),
            energy: e,
            continuity_sup: 0.0,
            continuity_l2: 0.0,
            action_simple_running: 0.0,
            action_standard_running: 0.0,
            hamilton_r1: 0.0,
        });
        Ok(())
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String> {
        let r = self.record(view).map_err(|e| e.to_string())?;
        self.records.push(r);
        Ok(())
    }
}
