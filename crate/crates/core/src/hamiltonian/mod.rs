//! Minimal-coupling Hamiltonian on a 1-D grid.
//!
//! The kinetic term is the gauge-covariant link stencil
//! `Σ_links w·|U_ab ψ_b − ψ_a|² · ħ²/(2m dx²)` with Peierls phases
//! `U_ab = exp(−i q/ħ ∫_a^b A dx)`. With `A = 0` and the second-order stencil
//! it is exactly `−ħ²/2m` times the three-point Laplacian. Amplitudes outside a
//! Dirichlet box and at its clamped endpoints read as zero.

mod interaction;
mod potential;

pub use interaction::{
    mean_field_potential, mean_field_values, InteractionKind, KernelMatrix, TwoBodyInteraction,
};
pub(crate) use interaction::mean_field_from_density;
pub use potential::{FieldFn, PotentialField};

use num_complex::Complex64;

use crate::calculus::central_difference;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{Boundary, Grid};
use crate::linalg::BandMatrix;
use crate::wavefunction::{same_grid, weighted_dot, Wavefunction};

/// ħ, particle mass and charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, charge: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, charge: f64) -> Result<Self> {
        let c = Self { hbar, mass, charge };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be > 0, got {}", self.hbar)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {}", self.mass)));
        }
        if !self.charge.is_finite() {
            return Err(Error::InvalidParameter(format!("charge must be finite, got {}", self.charge)));
        }
        Ok(())
    }
}

/// Finite-difference order of the kinetic link stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KineticStencil {
    /// Nearest-neighbour links; symbol `(2 − 2cos k dx)/dx²`.
    #[default]
    SecondOrder,
    /// Adds next-nearest links; error O(dx⁴) on smooth states.
    FourthOrder,
}

impl KineticStencil {
    /// (span, weight) of each link family.
    pub fn spans(self) -> &'static [(usize, f64)] {
        match self {
            Self::SecondOrder => &[(1, 1.0)],
            Self::FourthOrder => &[(1, 16.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    pub fn reach(self) -> usize {
        self.spans().iter().map(|s| s.0).max().unwrap_or(1)
    }
}

#[derive(Debug, Clone, Default)]
pub struct HamiltonianConfig {
    pub constants: PhysicalConstants,
    /// One-body potential V¹.
    pub v1: PotentialField,
    /// Scalar potential A₀.
    pub a0: PotentialField,
    /// Vector potential component A.
    pub a_vec: PotentialField,
    pub interaction: Option<TwoBodyInteraction>,
    pub stencil: KineticStencil,
}

impl HamiltonianConfig {
    pub fn new(constants: PhysicalConstants) -> Self {
        Self { constants, ..Self::default() }
    }

    pub fn with_potential(mut self, v1: PotentialField) -> Self {
        self.v1 = v1;
        self
    }

    pub fn with_scalar_potential(mut self, a0: PotentialField) -> Self {
        self.a0 = a0;
        self
    }

    pub fn with_vector_potential(mut self, a: PotentialField) -> Self {
        self.a_vec = a;
        self
    }

    pub fn with_interaction(mut self, interaction: TwoBodyInteraction) -> Self {
        self.interaction = Some(interaction);
        self
    }

    pub fn with_stencil(mut self, stencil: KineticStencil) -> Self {
        self.stencil = stencil;
        self
    }

    /// The same configuration with the interaction dropped.
    pub fn linear_part(&self) -> Self {
        Self { interaction: None, ..self.clone() }
    }

    /// True when no field depends on time.
    pub fn is_static(&self) -> bool {
        self.v1.is_static() && self.a0.is_static() && self.a_vec.is_static()
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.v1.validate()?;
        self.a0.validate()?;
        self.a_vec.validate()
    }
}

/// One kinetic link between lattice sites; `None` ends read as zero.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Link {
    /// Live end points; clamped nodes and ghosts beyond the box are `None`.
    pub a: Option<usize>,
    pub b: Option<usize>,
    /// In-grid end points, live or clamped; ghosts are `None`.
    pub a_node: Option<usize>,
    pub b_node: Option<usize>,
    pub span: usize,
    /// c·w with c = ħ²/(2m dx²).
    pub coupling: f64,
    /// Peierls factor transporting ψ_b to site a.
    pub phase: Complex64,
}

/// Every link touching at least one live node, each listed once.
pub(crate) fn kinetic_links(cfg: &HamiltonianConfig, grid: &Grid, t: f64) -> Result<Vec<Link>> {
    let PhysicalConstants { hbar, mass, charge } = cfg.constants;
    let dx = grid.dx();
    let c = hbar * hbar / (2.0 * mass * dx * dx);
    let n = grid.len() as isize;
    let a_field = if cfg.a_vec.is_zero() || charge == 0.0 {
        None
    } else {
        Some(cfg.a_vec.sample(grid, t)?)
    };
    let node = |k: isize| -> Option<usize> {
        match grid.boundary() {
            Boundary::Periodic => Some(k.rem_euclid(n) as usize),
            Boundary::Dirichlet => (0..n).contains(&k).then_some(k as usize),
        }
    };
    let live = |k: isize| node(k).filter(|&j| !grid.is_clamped(j));
    let mut links = Vec::new();
    for &(span, w) in cfg.stencil.spans() {
        let s = span as isize;
        let range = match grid.boundary() {
            Boundary::Periodic => 0..n,
            Boundary::Dirichlet => -s..n,
        };
        for k in range {
            let (a, b) = (live(k), live(k + s));
            if a.is_none() && b.is_none() {
                continue;
            }
            let phase = match (&a_field, a, b) {
                (Some(af), Some(_), Some(_)) => {
                    let flux: f64 = (0..s)
                        .map(|m| {
                            let i = (k + m).rem_euclid(n) as usize;
                            let j = (k + m + 1).rem_euclid(n) as usize;
                            0.5 * (af[i] + af[j]) * dx
                        })
                        .sum();
                    Complex64::from_polar(1.0, -charge * flux / hbar)
                }
                _ => Complex64::new(1.0, 0.0),
            };
            links.push(Link {
                a,
                b,
                a_node: node(k),
                b_node: node(k + s),
                span,
                coupling: c * w,
                phase,
            });
        }
    }
    Ok(links)
}

/// Real diagonal `V¹ + q·A₀ (+ extra)` at live nodes, zero at clamped ones.
pub(crate) fn diagonal_potential(
    cfg: &HamiltonianConfig,
    grid: &Grid,
    t: f64,
    extra: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut d = cfg.v1.sample(grid, t)?;
    if !cfg.a0.is_zero() {
        let a0 = cfg.a0.sample(grid, t)?;
        for (v, a) in d.iter_mut().zip(a0) {
            *v += cfg.constants.charge * a;
        }
    }
    if let Some(e) = extra {
        if e.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: e.len() });
        }
        for (v, x) in d.iter_mut().zip(e) {
            *v += x;
        }
    }
    for (j, v) in d.iter_mut().enumerate() {
        if grid.is_clamped(j) {
            *v = 0.0;
        }
    }
    Ok(d)
}

/// Banded matrix of Ĥ at time `t`, with an optional extra real diagonal
/// (typically a mean field). Rows and columns of clamped nodes are zero.
pub fn hamiltonian_matrix(
    cfg: &HamiltonianConfig,
    grid: &Grid,
    t: f64,
    extra_diagonal: Option<&[f64]>,
) -> Result<BandMatrix> {
    cfg.constants.validate()?;
    let mut m = BandMatrix::zeros(
        grid.len(),
        cfg.stencil.reach(),
        grid.boundary() == Boundary::Periodic,
    );
    for l in kinetic_links(cfg, grid, t)? {
        if let Some(a) = l.a {
            m.add(a, 0, Complex64::new(l.coupling, 0.0));
        }
        if let Some(b) = l.b {
            m.add(b, 0, Complex64::new(l.coupling, 0.0));
        }
        if let (Some(a), Some(b)) = (l.a, l.b) {
            let s = l.span as isize;
            m.add(a, s, -l.coupling * l.phase);
            m.add(b, -s, -l.coupling * l.phase.conj());
        }
    }
    for (j, v) in diagonal_potential(cfg, grid, t, extra_diagonal)?.into_iter().enumerate() {
        m.add(j, 0, Complex64::new(v, 0.0));
    }
    Ok(m)
}

/// P̂ψ = −iħ ∂ₓψ − qAψ with the central difference.
pub fn apply_mechanical_momentum(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    t: f64,
) -> Result<Wavefunction> {
    let grid = *psi.grid();
    let PhysicalConstants { hbar, charge, .. } = cfg.constants;
    let mut out = central_difference(&grid, psi.amplitudes());
    let minus_i_hbar = Complex64::new(0.0, -hbar);
    for v in &mut out {
        *v *= minus_i_hbar;
    }
    if !cfg.a_vec.is_zero() {
        let a = cfg.a_vec.sample(&grid, t)?;
        for ((v, p), a) in out.iter_mut().zip(psi.amplitudes()).zip(a) {
            *v -= charge * a * p;
        }
    }
    Ok(Wavefunction::from_parts(grid, out, psi.time()))
}

/// Mean-field diagonal from `source`, scaled by `weight`.
fn mean_field_diagonal(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    source: Option<&Wavefunction>,
    weight: f64,
) -> Result<Option<Vec<f64>>> {
    let Some(int) = &cfg.interaction else { return Ok(None) };
    let src = source.ok_or(Error::MissingMeanFieldSource)?;
    same_grid(psi, src)?;
    let mut u = mean_field_values(int, src, Exec::default())?;
    if weight != 1.0 {
        for v in &mut u {
            *v *= weight;
        }
    }
    Ok(Some(u))
}

/// Ĥψ, including the mean field built from `mean_field_source` when an
/// interaction is configured.
pub fn apply_hamiltonian(
    cfg: &HamiltonianConfig,
    psi: &Wavefunction,
    t: f64,
    mean_field_source: Option<&Wavefunction>,
) -> Result<Wavefunction> {
    let grid = *psi.grid();
    let u = mean_field_diagonal(cfg, psi, mean_field_source, 1.0)?;
    let m = hamiltonian_matrix(cfg, &grid, t, u.as_deref())?;
    Ok(Wavefunction::from_parts(grid, m.matvec(psi.amplitudes()), psi.time()))
}

/// Real part of ⟨ψ, Mψ⟩; fails if the imaginary part exceeds 1e-8.
pub(crate) fn expectation(m: &BandMatrix, psi: &Wavefunction) -> Result<f64> {
    let a = psi.amplitudes();
    let e = weighted_dot(psi.grid(), a, &m.matvec(a));
    if !e.re.is_finite() || !e.im.is_finite() {
        return Err(Error::NonFinite("energy".into()));
    }
    if e.im.abs() > 1e-8 {
        return Err(Error::NonHermitian(e.im));
    }
    Ok(e.re)
}

/// ⟨ψ, Ĥψ⟩ with the mean field at half weight.
pub fn energy(cfg: &HamiltonianConfig, psi: &Wavefunction, t: f64) -> Result<f64> {
    let u = mean_field_diagonal(cfg, psi, Some(psi), 0.5)?;
    expectation(&hamiltonian_matrix(cfg, psi.grid(), t, u.as_deref())?, psi)
}

/// ⟨φ, Ĥ_GP φ⟩ with the mean field at full weight.
pub fn chemical_potential(cfg: &HamiltonianConfig, phi: &Wavefunction, t: f64) -> Result<f64> {
    let u = mean_field_diagonal(cfg, phi, Some(phi), 1.0)?;
    expectation(&hamiltonian_matrix(cfg, phi.grid(), t, u.as_deref())?, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::wavefunction::{inner_product, normalize};
    use std::f64::consts::PI;

    fn plane_wave(n: usize, mode: f64) -> (Wavefunction, f64) {
        let g = make_grid(0.0, 2.0 * PI, n, Boundary::Periodic).unwrap();
        let k = mode;
        (Wavefunction::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x)).unwrap(), k)
    }

    fn ho_ground(n: usize) -> Wavefunction {
        let g = make_grid(-10.0, 10.0, n, Boundary::Dirichlet).unwrap();
        Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x / 2.0).exp() / PI.powf(0.25), 0.0))
            .unwrap()
    }

    fn harmonic() -> HamiltonianConfig {
        HamiltonianConfig::default().with_potential(PotentialField::harmonic(1.0, 1.0, 0.0))
    }

    #[test]
    fn momentum_on_plane_wave() {
        let (psi, k) = plane_wave(64, 3.0);
        let dx = psi.grid().dx();
        let cfg = HamiltonianConfig::default().with_vector_potential(PotentialField::Constant(0.4));
        let p = apply_mechanical_momentum(&cfg, &psi, 0.0).unwrap();
        let expect = (k * dx).sin() / dx - 0.4;
        for (o, i) in p.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((o - expect * i).norm() < 1e-12);
        }
    }

    #[test]
    fn free_plane_wave_energy_symbol() {
        let (psi, k) = plane_wave(50, 4.0);
        let dx = psi.grid().dx();
        let h = apply_hamiltonian(&HamiltonianConfig::default(), &psi, 0.0, None).unwrap();
        let keff2 = (2.0 - 2.0 * (k * dx).cos()) / (dx * dx);
        for (o, i) in h.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((o - 0.5 * keff2 * i).norm() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_symbol() {
        let (psi, k) = plane_wave(50, 4.0);
        let dx = psi.grid().dx();
        let cfg = HamiltonianConfig::default().with_stencil(KineticStencil::FourthOrder);
        let h = apply_hamiltonian(&cfg, &psi, 0.0, None).unwrap();
        let sym = (16.0 * (2.0 - 2.0 * (k * dx).cos()) - (2.0 - 2.0 * (2.0 * k * dx).cos()))
            / (12.0 * dx * dx);
        for (o, i) in h.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((o - 0.5 * sym * i).norm() < 1e-10);
        }
    }

    #[test]
    fn harmonic_ground_state_is_eigenfunction() {
        let psi = ho_ground(401);
        let cfg = harmonic().with_stencil(KineticStencil::FourthOrder);
        let h = apply_hamiltonian(&cfg, &psi, 0.0, None).unwrap();
        for j in 1..400 {
            assert!((h.amplitudes()[j] - 0.5 * psi.amplitudes()[j]).norm() < 1e-4);
        }
    }

    #[test]
    fn second_order_ground_energy_bias_is_frozen() {
        // First-order perturbation of the three-point stencil: −dx²/32 at ω = 1.
        let psi = normalize(&ho_ground(2001)).unwrap();
        let e2 = energy(&harmonic(), &psi, 0.0).unwrap();
        let dx = psi.grid().dx();
        assert!((e2 - (0.5 - dx * dx / 32.0)).abs() < 1e-8, "{e2}");
        let e4 = energy(&harmonic().with_stencil(KineticStencil::FourthOrder), &psi, 0.0).unwrap();
        assert!((e4 - 0.5).abs() < 1e-6, "{e4}");
    }

    #[test]
    fn gaussian_width_energy_closed_form() {
        // E(σ) = 1/(8σ²) + σ²/2 for ψ ∝ exp(−x²/4σ²).
        let g = make_grid(-10.0, 10.0, 2001, Boundary::Dirichlet).unwrap();
        let psi = normalize(
            &Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x / 4.0).exp(), 0.0)).unwrap(),
        )
        .unwrap();
        let e = energy(&harmonic().with_stencil(KineticStencil::FourthOrder), &psi, 0.0).unwrap();
        assert!((e - 0.625).abs() < 1e-6, "{e}");
    }

    #[test]
    fn contact_term_matches_elementwise_oracle() {
        let psi = normalize(&ho_ground(201)).unwrap();
        let cfg = harmonic().with_interaction(TwoBodyInteraction::contact(1.0, 100).unwrap());
        let lin = apply_hamiltonian(&cfg.linear_part(), &psi, 0.0, None).unwrap();
        let full = apply_hamiltonian(&cfg, &psi, 0.0, Some(&psi)).unwrap();
        for ((f, l), p) in full.amplitudes().iter().zip(lin.amplitudes()).zip(psi.amplitudes()) {
            assert!((f - (l + 99.0 * p.norm_sqr() * p)).norm() < 1e-13);
        }
        assert!(matches!(apply_hamiltonian(&cfg, &psi, 0.0, None), Err(Error::MissingMeanFieldSource)));
    }

    #[test]
    fn zero_coupling_energy_equals_linear() {
        let psi = normalize(&ho_ground(201)).unwrap();
        let cfg = harmonic().with_interaction(TwoBodyInteraction::contact(0.0, 10).unwrap());
        assert_eq!(energy(&cfg, &psi, 0.0).unwrap(), energy(&cfg.linear_part(), &psi, 0.0).unwrap());
    }

    #[test]
    fn chemical_potential_exceeds_energy_for_repulsion() {
        let psi = normalize(&ho_ground(201)).unwrap();
        let cfg = harmonic().with_interaction(TwoBodyInteraction::contact(0.5, 11).unwrap());
        assert!(chemical_potential(&cfg, &psi, 0.0).unwrap() > energy(&cfg, &psi, 0.0).unwrap());
    }

    #[test]
    fn link_phase_is_gauge_covariant() {
        // A = ∂χ with χ = x; e^{iqχ/ħ} is periodic on [0, 2π).
        let g = make_grid(0.0, 2.0 * PI, 64, Boundary::Periodic).unwrap();
        let psi = normalize(
            &Wavefunction::from_fn(g, 0.0, |x| Complex64::new(1.0 + 0.3 * x.cos(), 0.2 * (2.0 * x).sin()))
                .unwrap(),
        )
        .unwrap();
        let e0 = energy(&HamiltonianConfig::default(), &psi, 0.0).unwrap();
        let cfg = HamiltonianConfig::default().with_vector_potential(PotentialField::Constant(1.0));
        let moved = Wavefunction::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, x)).unwrap();
        let amps = psi.amplitudes().iter().zip(moved.amplitudes()).map(|(p, m)| p * m).collect();
        let e1 = energy(&cfg, &Wavefunction::new(g, amps, 0.0).unwrap(), 0.0).unwrap();
        assert!((e0 - e1).abs() < 1e-12, "{e0} {e1}");
    }

    #[test]
    fn scalar_potential_shift_moves_energy_by_qc() {
        let psi = normalize(&ho_ground(201)).unwrap();
        let mut cfg = harmonic();
        cfg.constants.charge = -1.7;
        let e0 = energy(&cfg, &psi, 0.0).unwrap();
        let e1 = energy(&cfg.clone().with_scalar_potential(PotentialField::Constant(0.3)), &psi, 0.0).unwrap();
        assert!((e1 - e0 - (-1.7 * 0.3)).abs() < 1e-10);
    }

    #[test]
    fn matrix_is_hermitian_under_quadrature() {
        let g = make_grid(-3.0, 3.0, 40, Boundary::Dirichlet).unwrap();
        let cfg = harmonic()
            .with_vector_potential(PotentialField::time_dependent(|x, _| (x).sin()))
            .with_stencil(KineticStencil::FourthOrder);
        let a = Wavefunction::from_fn(g, 0.0, |x| Complex64::new(x.cos(), x * 0.1)).unwrap();
        let b = Wavefunction::from_fn(g, 0.0, |x| Complex64::new((x * x).sin(), 1.0)).unwrap();
        let ha = apply_hamiltonian(&cfg, &a, 0.0, None).unwrap();
        let hb = apply_hamiltonian(&cfg, &b, 0.0, None).unwrap();
        let l = inner_product(&b, &ha).unwrap();
        let r = inner_product(&a, &hb).unwrap().conj();
        assert!((l - r).norm() < 1e-10);
    }
}
