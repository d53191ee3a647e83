use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hamiltonian::{
    diagonal_potential, energy, expectation, hamiltonian_matrix, mean_field_values, HamiltonianConfig,
};
use crate::linalg::BandMatrix;
use crate::wavefunction::{normalize, weighted_dot, Wavefunction};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub state: Wavefunction,
    /// Energy functional of `state` (mean field at half weight).
    pub energy: f64,
    /// ⟨φ, Ĥφ⟩ with the full-weight mean field; equals `energy` when linear.
    pub chemical_potential: f64,
    /// ‖Ĥφ − μφ‖ of the final state.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy of the normalized start followed by one entry per iteration.
    pub energy_history: Vec<f64>,
}

/// `I + (dτ/ħ)(Ĥ − s)` with `s` the smallest potential value, so the
/// operator in parentheses is positive semi-definite and every step
/// lowers the energy. Clamped rows stay identity.
fn relaxation_matrix(h: &BandMatrix, floor: f64, dtau: f64, hbar: f64, clamped: &[usize]) -> BandMatrix {
    let c = dtau / hbar;
    let mut m = h.shifted(Complex64::new(1.0 - c * floor, 0.0), Complex64::new(c, 0.0));
    for &j in clamped {
        m.set(j, 0, Complex64::new(1.0, 0.0));
    }
    m
}

/// Ground state by backward-Euler imaginary-time steps
/// `(1 + dτ(Ĥ − s)/ħ) φ' = φ`, renormalized after every step. For an
/// interacting configuration the mean field is rebuilt from the current
/// orbital each step. Stops once the energy changes by less than `tol` and
/// the eigen-residual is below `10·tol`.
pub fn ground_state_imaginary_time(
    cfg: &HamiltonianConfig,
    psi0: &Wavefunction,
    dtau: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateResult> {
    cfg.validate()?;
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::InvalidParameter(format!("dtau must be > 0, got {dtau}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let grid = *psi0.grid();
    let t = psi0.time();
    let hbar = cfg.constants.hbar;
    let clamped: Vec<usize> = (0..grid.len()).filter(|&j| grid.is_clamped(j)).collect();
    let live_min = |d: &[f64]| {
        d.iter()
            .enumerate()
            .filter(|(j, _)| !grid.is_clamped(*j))
            .fold(f64::INFINITY, |m, (_, v)| m.min(*v))
    };

    let mut phi = normalize(psi0)?;
    let linear = match &cfg.interaction {
        None => {
            let h = hamiltonian_matrix(cfg, &grid, t, None)?;
            let floor = live_min(&diagonal_potential(cfg, &grid, t, None)?);
            let lu = relaxation_matrix(&h, floor, dtau, hbar, &clamped).factor()?;
            Some((h, lu))
        }
        Some(_) => None,
    };
    let field = |phi: &Wavefunction| -> Result<Option<Vec<f64>>> {
        cfg.interaction
            .as_ref()
            .map(|int| mean_field_values(int, phi, Exec::default()))
            .transpose()
    };
    let full_hamiltonian = |phi: &Wavefunction| -> Result<BandMatrix> {
        match &linear {
            Some((h, _)) => Ok(h.clone()),
            None => hamiltonian_matrix(cfg, &grid, t, field(phi)?.as_deref()),
        }
    };
    let residual_of = |phi: &Wavefunction| -> Result<(f64, f64)> {
        let h = full_hamiltonian(phi)?;
        let mu = expectation(&h, phi)?;
        let a = phi.amplitudes();
        let r: Vec<Complex64> = h.matvec(a).iter().zip(a).map(|(h, p)| h - mu * p).collect();
        Ok((mu, weighted_dot(&grid, &r, &r).re.sqrt()))
    };

    let mut history = vec![energy(cfg, &phi, t)?];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut amps = phi.amplitudes().to_vec();
        match &linear {
            Some((_, lu)) => lu.solve_in_place(&mut amps),
            None => {
                let u = field(&phi)?;
                let h = hamiltonian_matrix(cfg, &grid, t, u.as_deref())?;
                let floor = live_min(&diagonal_potential(cfg, &grid, t, u.as_deref())?);
                relaxation_matrix(&h, floor, dtau, hbar, &clamped).factor()?.solve_in_place(&mut amps);
            }
        }
        phi = normalize(&Wavefunction::new(grid, amps, t)?)?;
        let e = energy(cfg, &phi, t)?;
        let de = (e - history[history.len() - 1]).abs();
        history.push(e);
        if de < tol && residual_of(&phi)?.1 < 10.0 * tol {
            converged = true;
            break;
        }
    }
    let (chemical_potential, residual) = residual_of(&phi)?;
    if !converged {
        log::warn!("imaginary time stopped after {iterations} iterations without converging");
    }
    Ok(GroundStateResult {
        energy: history[history.len() - 1],
        state: phi,
        chemical_potential,
        residual,
        iterations,
        converged,
        energy_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};
    use crate::hamiltonian::{chemical_potential, KineticStencil, PotentialField, TwoBodyInteraction};
    use std::f64::consts::PI;

    fn lumpy(grid: crate::grid::Grid) -> Wavefunction {
        Wavefunction::from_fn(grid, 0.0, |x| {
            Complex64::new((-(x - 0.7).powi(2)).exp() + 0.4 * (-(x + 1.3).powi(2) / 2.0).exp(), 0.2 * x.sin())
        })
        .unwrap()
    }

    fn monotone(h: &[f64]) -> bool {
        h.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }

    #[test]
    fn harmonic_ground_energy() {
        let g = make_grid(-10.0, 10.0, 2001, Boundary::Dirichlet).unwrap();
        let cfg = HamiltonianConfig::default()
            .with_potential(PotentialField::harmonic(1.0, 1.0, 0.0))
            .with_stencil(KineticStencil::FourthOrder);
        let r = ground_state_imaginary_time(&cfg, &lumpy(g), 0.5, 1e-10, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.energy - 0.5).abs() < 1e-6, "{}", r.energy);
        assert!(monotone(&r.energy_history));
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn particle_in_a_box() {
        let g = make_grid(0.0, 1.0, 2001, Boundary::Dirichlet).unwrap();
        let psi0 = Wavefunction::from_fn(g, 0.0, |x| Complex64::new(x * (1.0 - x) * (1.0 + x), 0.0)).unwrap();
        let r = ground_state_imaginary_time(&HamiltonianConfig::default(), &psi0, 0.05, 1e-8, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.energy - PI * PI / 2.0).abs() < 1e-3);
        assert!(monotone(&r.energy_history));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let g = make_grid(-5.0, 5.0, 101, Boundary::Dirichlet).unwrap();
        let cfg = HamiltonianConfig::default().with_potential(PotentialField::harmonic(1.0, 1.0, 0.0));
        let r = ground_state_imaginary_time(&cfg, &lumpy(g), 0.1, 1e-10, 1).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.energy_history.len(), 2);
    }

    #[test]
    fn repulsive_condensate_energy_below_chemical_potential() {
        let g = make_grid(-8.0, 8.0, 321, Boundary::Dirichlet).unwrap();
        let cfg = HamiltonianConfig::default()
            .with_potential(PotentialField::harmonic(1.0, 1.0, 0.0))
            .with_interaction(TwoBodyInteraction::contact(0.5, 11).unwrap());
        let r = ground_state_imaginary_time(&cfg, &lumpy(g), 0.02, 1e-10, 100_000).unwrap();
        assert!(r.converged);
        assert!(monotone(&r.energy_history));
        let mu = chemical_potential(&cfg, &r.state, 0.0).unwrap();
        assert!((mu - r.chemical_potential).abs() < 1e-12);
        assert!(mu > r.energy);
    }
}
