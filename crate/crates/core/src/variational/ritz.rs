use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hamiltonian::{energy, HamiltonianConfig};
use crate::variational::{nelder_mead, NelderMeadOptions, TrialFamily};
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, PartialEq)]
pub struct RitzResult {
    pub params: Vec<f64>,
    /// ⟨Φ, ĤΦ⟩ at `params`; an upper bound to the ground energy on the grid.
    pub energy: f64,
    /// Best energy after each simplex iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap stopped the search.
    pub converged: bool,
    pub state: Wavefunction,
}

/// Minimize the energy over `family` on `grid`. Parameters outside the
/// family bounds, or states that cannot be built, score +∞.
pub fn rayleigh_ritz_minimize(
    cfg: &HamiltonianConfig,
    family: &TrialFamily,
    grid: &Grid,
    initial_params: &[f64],
    opts: &NelderMeadOptions,
) -> Result<RitzResult> {
    cfg.validate()?;
    family.check(initial_params)?;
    let objective = |p: &[f64]| -> f64 {
        family
            .build(p, grid)
            .and_then(|psi| energy(cfg, &psi, 0.0))
            .unwrap_or(f64::INFINITY)
    };
    if !objective(initial_params).is_finite() {
        let psi = family.build(initial_params, grid)?;
        energy(cfg, &psi, 0.0)?;
        return Err(Error::NonFinite("trial energy at the initial parameters".into()));
    }
    let r = nelder_mead(objective, initial_params, opts)?;
    if !r.converged {
        log::warn!("Rayleigh-Ritz search for {} hit the iteration cap", family.name());
    }
    let state = family.build(&r.x, grid)?;
    Ok(RitzResult {
        energy: r.value,
        params: r.x,
        history: r.history,
        iterations: r.iterations,
        converged: r.converged,
        state,
    })
}
