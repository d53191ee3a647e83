use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::Boundary;
use crate::hamiltonian::{mean_field_from_density, HamiltonianConfig};
use crate::wavefunction::Wavefunction;

/// One Strang step `e^{−iVdt/2ħ} e^{−iTdt/ħ} e^{−iVdt/2ħ}` with the kinetic
/// factor diagonal in Fourier space. The kinetic symbol is that of the
/// configured link stencil, so the scheme shares its spectrum with
/// Crank-Nicolson. The mean field is rebuilt from the current density before
/// each potential half step.
pub fn step_split_operator(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    t: f64,
    dt: f64,
) -> Result<Wavefunction> {
    let grid = *psi.grid();
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::Unsupported("split-operator needs a periodic grid".into()));
    }
    if !(cfg.a_vec.is_zero() || cfg.constants.charge == 0.0) {
        return Err(Error::Unsupported("split-operator needs A = 0".into()));
    }
    let hbar = cfg.constants.hbar;
    let n = grid.len();
    let tm = t + 0.5 * dt;
    let mut v = cfg.v1.sample(&grid, tm)?;
    if !cfg.a0.is_zero() {
        for (vi, a) in v.iter_mut().zip(cfg.a0.sample(&grid, tm)?) {
            *vi += cfg.constants.charge * a;
        }
    }
    let half_kick = |amps: &mut [Complex64]| -> Result<()> {
        let u = match &cfg.interaction {
            Some(int) => {
                let rho: Vec<f64> = amps.iter().map(Complex64::norm_sqr).collect();
                Some(mean_field_from_density(int, &grid, &rho, Exec::default())?)
            }
            None => None,
        };
        for (j, a) in amps.iter_mut().enumerate() {
            let pot = v[j] + u.as_ref().map_or(0.0, |u| u[j]);
            *a *= Complex64::from_polar(1.0, -0.5 * pot * dt / hbar);
        }
        Ok(())
    };

    let c = hbar * hbar / (2.0 * cfg.constants.mass * grid.dx() * grid.dx());
    let spans = cfg.stencil.spans();
    let drift: Vec<Complex64> = (0..n)
        .map(|m| {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            let sym: f64 = spans.iter().map(|&(s, w)| w * (2.0 - 2.0 * (s as f64 * theta).cos())).sum();
            Complex64::from_polar(1.0 / n as f64, -c * sym * dt / hbar)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut amps = psi.amplitudes().to_vec();
    half_kick(&mut amps)?;
    forward.process(&mut amps);
    for (a, d) in amps.iter_mut().zip(&drift) {
        *a *= d;
    }
    inverse.process(&mut amps);
    half_kick(&mut amps)?;
    let out = Wavefunction::from_parts(grid, amps, t + dt);
    if !out.is_finite() {
        return Err(Error::NonFinite(format!("split-operator state at t = {}", t + dt)));
    }
    Ok(out)
}
