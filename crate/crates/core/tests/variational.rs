use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qmaction::hamiltonian::PotentialField;
use qmaction::propagation::{propagate, PropagationPlan, Trajectory};
use qmaction::variational::{
    action, action_increment, lagrangian_densities, rayleigh_ritz_minimize, stationarity_test,
    ActionDensity, NelderMeadOptions, TrialFamily,
};
use qmaction::{make_grid, normalize, Boundary, Grid, HamiltonianConfig, Wavefunction};

fn harmonic() -> HamiltonianConfig {
    HamiltonianConfig::default().with_potential(PotentialField::harmonic(1.0, 1.0, 0.0))
}

fn packet(grid: Grid, c: f64, s: f64, k: f64) -> Wavefunction {
    normalize(
        &Wavefunction::from_fn(grid, 0.0, |x| {
            Complex64::from_polar((-(x - c).powi(2) / (4.0 * s * s)).exp(), k * x)
        })
        .unwrap(),
    )
    .unwrap()
}

fn solution(cfg: &HamiltonianConfig, psi: &Wavefunction, dt: f64, steps: usize) -> Trajectory {
    propagate(cfg, psi, &PropagationPlan::new(dt, steps), &mut []).unwrap()
}

fn bump(grid: Grid) -> Wavefunction {
    Wavefunction::from_fn(grid, 0.0, |x| Complex64::new((-(x - 0.5).powi(2)).exp(), 0.4 * x * (-x * x).exp()))
        .unwrap()
}

#[test]
fn stationary_trajectory_has_vanishing_action() {
    let g = make_grid(-10.0, 10.0, 401, Boundary::Dirichlet).unwrap();
    let traj = solution(&harmonic(), &packet(g, 0.0, 0.5f64.sqrt(), 0.0), 1e-3, 1000);
    let s = action(&harmonic(), &traj, ActionDensity::Simple).unwrap();
    assert!(s.value.abs() < 1e-6 && s.imaginary.abs() < 1e-6, "{s:?}");
    assert_eq!(s.window, (0.0, traj.last().unwrap().time()));
    let st = action(&harmonic(), &traj, ActionDensity::Standard).unwrap();
    assert!((s.value - st.value).abs() < 1e-8);
}

#[test]
fn densities_give_the_same_action_on_moving_packets() {
    let g = make_grid(-10.0, 10.0, 401, Boundary::Dirichlet).unwrap();
    let cfg = harmonic().with_vector_potential(PotentialField::time_dependent(|x, t| 0.3 * x * t.cos()));
    let traj = solution(&cfg, &packet(g, 1.0, 0.7, 0.8), 1e-2, 200);
    let a = action(&cfg, &traj, ActionDensity::Simple).unwrap();
    let b = action(&cfg, &traj, ActionDensity::Standard).unwrap();
    assert!((a.value - b.value).abs() < 1e-8, "{} {}", a.value, b.value);
    // Holds off-shell as well: a summation-by-parts identity.
    let off: Vec<Wavefunction> = traj
        .snapshots()
        .iter()
        .map(|s| s.scaled(Complex64::from_polar(1.0 + 0.1 * s.time(), 2.0 * s.time())))
        .collect();
    let off = Trajectory::from_snapshots(off, 1).unwrap();
    let a = action(&cfg, &off, ActionDensity::Simple).unwrap();
    let b = action(&cfg, &off, ActionDensity::Standard).unwrap();
    assert!((a.value - b.value).abs() < 1e-8 * a.value.abs().max(1.0));
}

#[test]
fn lagrangian_is_real_on_solutions() {
    let g = make_grid(-10.0, 10.0, 401, Boundary::Dirichlet).unwrap();
    let traj = solution(&harmonic(), &packet(g, 1.0, 0.7, 0.8), 1e-3, 500);
    for w in traj.snapshots().windows(2) {
        let inc = action_increment(&harmonic(), &w[0], &w[1]).unwrap();
        let dt = w[1].time() - w[0].time();
        assert!((inc.simple.im / dt).abs() < 1e-6);
    }
}

#[test]
fn divergence_integral_equals_boundary_flux() {
    // Continuum flux (ħ²/2m)·Re(ψ*∂ₓψ) at the walls, where ψ is clamped.
    let g = make_grid(-4.0, 4.0, 81, Boundary::Dirichlet).unwrap();
    let amps: Vec<Complex64> =
        (0..81).map(|j| Complex64::new(((j * 7919) % 97) as f64 / 97.0, ((j * 104729) % 89) as f64 / 89.0)).collect();
    let psi = Wavefunction::new(g, amps.clone(), 0.0).unwrap();
    let rate = Wavefunction::new(g, amps.iter().rev().cloned().collect(), 0.0).unwrap();
    let s = lagrangian_densities(&harmonic(), &psi, &rate, 0.0).unwrap();
    let p = psi.amplitudes();
    let dx = g.dx();
    let flux = |j: usize, nb: usize| 0.5 * (p[j].conj() * (p[nb] - p[j]) / dx).re;
    let oracle = flux(80, 79) - flux(0, 1);
    let lhs = g.integrate(&s.sil()) - s.integrated_standard();
    assert!((lhs - oracle).abs() < 1e-10, "{lhs} {oracle}");
}

#[test]
fn time_reversal_conjugates_the_action() {
    let g = make_grid(-8.0, 8.0, 201, Boundary::Dirichlet).unwrap();
    let cfg = harmonic();
    let reverse = |t: &Trajectory| {
        let s = t.snapshots();
        let times = t.times();
        let out = s.iter().rev().zip(&times).map(|(w, &tm)| w.conj().with_time(tm)).collect();
        Trajectory::from_snapshots(out, 1).unwrap()
    };
    let sol = solution(&cfg, &packet(g, 1.0, 0.7, 0.5), 1e-2, 100);
    let (a, b) = (
        action(&cfg, &sol, ActionDensity::Simple).unwrap(),
        action(&cfg, &reverse(&sol), ActionDensity::Simple).unwrap(),
    );
    assert!((a.value + b.value).abs() < 1e-8);
    let off: Vec<Wavefunction> = sol
        .snapshots()
        .iter()
        .map(|s| s.scaled(Complex64::from_polar(1.0 + 0.2 * s.time(), 0.7 * s.time())))
        .collect();
    let off = Trajectory::from_snapshots(off, 1).unwrap();
    let (a, b) = (
        action(&cfg, &off, ActionDensity::Simple).unwrap().complex(),
        action(&cfg, &reverse(&off), ActionDensity::Simple).unwrap().complex(),
    );
    assert!(a.norm() > 1e-2);
    assert!((a.conj() - b).norm() < 1e-10 * a.norm().max(1.0), "{a} {b}");
}

#[test]
fn global_phase_leaves_action_unchanged() {
    let g = make_grid(-8.0, 8.0, 201, Boundary::Dirichlet).unwrap();
    let sol = solution(&harmonic(), &packet(g, 1.0, 0.7, 0.5), 1e-2, 100);
    let off: Vec<Wavefunction> =
        sol.snapshots().iter().map(|s| s.scaled(Complex64::from_polar(1.0, 0.3 * s.time()))).collect();
    let off = Trajectory::from_snapshots(off, 1).unwrap();
    let phase = Complex64::from_polar(1.0, 0.37);
    let turned =
        Trajectory::from_snapshots(off.snapshots().iter().map(|s| s.scaled(phase)).collect(), 1).unwrap();
    let a = action(&harmonic(), &off, ActionDensity::Simple).unwrap().complex();
    let b = action(&harmonic(), &turned, ActionDensity::Simple).unwrap().complex();
    assert!((a - b).norm() < 1e-10);
}

#[test]
fn action_is_stationary_only_on_solutions() {
    let g = make_grid(-8.0, 8.0, 201, Boundary::Dirichlet).unwrap();
    let cfg = harmonic();
    let sol = solution(&cfg, &packet(g, 0.0, 0.5f64.sqrt(), 0.0), 1e-3, 1000);
    let eps = [1e-2, 1e-3, 1e-4];
    for which in [ActionDensity::Simple, ActionDensity::Standard] {
        let r = stationarity_test(&cfg, &sol, &bump(g), &eps, which).unwrap();
        let slope = r.slope.unwrap();
        assert!((slope - 2.0).abs() < 0.15, "{which:?} {slope}");
    }
    let wrong: Vec<Wavefunction> = sol
        .snapshots()
        .iter()
        .map(|s| s.scaled(Complex64::from_polar(1.0, 0.3 * s.time())))
        .collect();
    let wrong = Trajectory::from_snapshots(wrong, 1).unwrap();
    let r = stationarity_test(&cfg, &wrong, &bump(g), &eps, ActionDensity::Simple).unwrap();
    assert!((r.slope.unwrap() - 1.0).abs() < 0.15, "{:?}", r.slope);
    let z = stationarity_test(&cfg, &sol, &bump(g), &[0.0, 1e-3, 1e-2], ActionDensity::Simple).unwrap();
    assert_eq!(z.samples[0], (0.0, 0.0));
    assert!(stationarity_test(&cfg, &sol, &bump(g), &[1e-3, 1e-3], ActionDensity::Simple).is_err());
}

/// Lowest eigenvalue of −½∂² + V on the interior nodes, built densely.
fn dense_ground_energy(grid: &Grid, v: impl Fn(f64) -> f64) -> f64 {
    let m = grid.len() - 2;
    let dx = grid.dx();
    let mut h = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = 1.0 / (dx * dx) + v(grid.x(i + 1));
        if i + 1 < m {
            h[(i, i + 1)] = -0.5 / (dx * dx);
            h[(i + 1, i)] = -0.5 / (dx * dx);
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Lowest eigenvalue of the same tridiagonal matrix by Sturm-count
/// bisection; for grids too large for the dense solver.
fn sturm_ground_energy(grid: &Grid, v: impl Fn(f64) -> f64) -> f64 {
    let m = grid.len() - 2;
    let dx = grid.dx();
    let diag: Vec<f64> = (0..m).map(|i| 1.0 / (dx * dx) + v(grid.x(i + 1))).collect();
    let off = 0.5 / (dx * dx);
    let below = |lam: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for (i, a) in diag.iter().enumerate() {
            d = a - lam - if i == 0 { 0.0 } else { off * off / d };
            if d == 0.0 {
                d = f64::MIN_POSITIVE;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off;
    let mut hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn sturm_and_dense_oracles_agree() {
    let g = make_grid(-6.0, 6.0, 201, Boundary::Dirichlet).unwrap();
    let a = dense_ground_energy(&g, |x| x.powi(4));
    let b = sturm_ground_energy(&g, |x| x.powi(4));
    assert!((a - b).abs() < 1e-10, "{a} {b}");
}

#[test]
fn ritz_energies_bound_the_dense_ground_energy() {
    let opts = NelderMeadOptions::default();
    let g = make_grid(-6.0, 6.0, 401, Boundary::Dirichlet).unwrap();

    let quartic = HamiltonianConfig::default().with_potential(PotentialField::Quartic { strength: 1.0, center: 0.0 });
    let e0 = dense_ground_energy(&g, |x| x.powi(4));
    let r = rayleigh_ritz_minimize(&quartic, &TrialFamily::gaussian(), &g, &[0.2, 0.8], &opts).unwrap();
    let gap = (r.energy - e0) / e0;
    assert!(r.energy >= e0 - 1e-8 && gap < 0.05, "{} {e0}", r.energy);

    let shifted = harmonic().with_potential(PotentialField::harmonic(1.0, 1.0, 0.7));
    let e0 = dense_ground_energy(&g, |x| 0.5 * (x - 0.7).powi(2));
    let r = rayleigh_ritz_minimize(&shifted, &TrialFamily::gaussian_with_phase(), &g, &[0.0, 1.0, 0.3], &opts)
        .unwrap();
    assert!(r.energy >= e0 - 1e-8 && r.energy - e0 < 1e-4, "{} {e0}", r.energy);

    let b = make_grid(0.0, 1.0, 201, Boundary::Dirichlet).unwrap();
    let e0 = dense_ground_energy(&b, |_| 0.0);
    let fam = TrialFamily::box_sine(0.0, 1.0, 3).unwrap();
    let r = rayleigh_ritz_minimize(&HamiltonianConfig::default(), &fam, &b, &[0.5, -0.3], &opts).unwrap();
    assert!(r.energy >= e0 - 1e-8 && r.energy - e0 < 1e-6, "{} {e0}", r.energy);
}

#[test]
fn frozen_wide_gaussian_is_a_poor_but_valid_bound() {
    let g = make_grid(-120.0, 120.0, 4001, Boundary::Dirichlet).unwrap();
    let fam = TrialFamily::gaussian().with_frozen("sigma", 10.0).unwrap();
    let r = rayleigh_ritz_minimize(&harmonic(), &fam, &g, &[1.0], &NelderMeadOptions::default()).unwrap();
    // E(σ) = 1/(8σ²) + σ²/2.
    assert!((r.energy - 50.00125).abs() < 1e-3, "{}", r.energy);
    assert!(r.energy >= sturm_ground_energy(&g, |x| 0.5 * x * x) - 1e-8);
}
