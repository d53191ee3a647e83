//! Second-order central finite differences.
//!
//! Neighbours outside a Dirichlet box read as zero and the clamped endpoints
//! of the output are zero; periodic grids wrap.

use num_complex::Complex64;

use crate::grid::Grid;
use crate::wavefunction::Wavefunction;

#[inline]
fn at<T: Copy + Default>(grid: &Grid, v: &[T], j: usize, offset: isize) -> T {
    grid.neighbor(j, offset).map_or_else(T::default, |k| v[k])
}

/// (Ψ_{j+1} − 2Ψ_j + Ψ_{j−1}) / dx².
pub fn laplacian(psi: &Wavefunction) -> Wavefunction {
    let grid = *psi.grid();
    let a = psi.amplitudes();
    let inv = 1.0 / (grid.dx() * grid.dx());
    let out = (0..grid.len())
        .map(|j| (at(&grid, a, j, 1) - 2.0 * a[j] + at(&grid, a, j, -1)) * inv)
        .collect();
    Wavefunction::from_parts(grid, out, psi.time())
}

/// (Ψ_{j+1} − Ψ_{j−1}) / 2dx.
pub fn first_derivative(psi: &Wavefunction) -> Wavefunction {
    let grid = *psi.grid();
    let out = central_difference(&grid, psi.amplitudes());
    Wavefunction::from_parts(grid, out, psi.time())
}

pub(crate) fn central_difference(grid: &Grid, a: &[Complex64]) -> Vec<Complex64> {
    let inv = 0.5 / grid.dx();
    (0..grid.len())
        .map(|j| {
            if grid.is_clamped(j) {
                Complex64::new(0.0, 0.0)
            } else {
                (at(grid, a, j, 1) - at(grid, a, j, -1)) * inv
            }
        })
        .collect()
}

/// Central difference of a real field; clamped endpoints get zero.
pub fn derivative_real(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let inv = 0.5 / grid.dx();
    (0..grid.len())
        .map(|j| {
            if grid.is_clamped(j) {
                0.0
            } else {
                (at(grid, f, j, 1) - at(grid, f, j, -1)) * inv
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};
    use crate::wavefunction::inner_product;
    use std::f64::consts::PI;

    fn plane_wave(n: usize, mode: f64) -> (Wavefunction, f64) {
        let g = make_grid(0.0, 2.0 * PI, n, Boundary::Periodic).unwrap();
        let k = mode;
        (Wavefunction::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x)).unwrap(), k)
    }

    #[test]
    fn plane_wave_is_stencil_eigenfunction() {
        let (psi, k) = plane_wave(64, 3.0);
        let dx = psi.grid().dx();
        let keff2 = (2.0 - 2.0 * (k * dx).cos()) / (dx * dx);
        let lap = laplacian(&psi);
        let der = first_derivative(&psi);
        let keff = (k * dx).sin() / dx;
        for j in 0..psi.len() {
            let z = psi.amplitudes()[j];
            assert!((lap.amplitudes()[j] + keff2 * z).norm() < 1e-11);
            assert!((der.amplitudes()[j] - Complex64::i() * keff * z).norm() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let g = make_grid(0.0, 1.0, 32, Boundary::Periodic).unwrap();
        let c = Wavefunction::from_fn(g, 0.0, |_| Complex64::new(0.7, -0.2)).unwrap();
        assert!(laplacian(&c).amplitudes().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn even_gaussian_has_zero_slope_at_centre() {
        let g = make_grid(-5.0, 5.0, 101, Boundary::Dirichlet).unwrap();
        let psi = Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap();
        assert!(first_derivative(&psi).amplitudes()[50].norm() < 1e-15);
    }

    fn max_err<F: Fn(&Wavefunction) -> Wavefunction>(
        n: usize,
        op: &F,
        f: fn(f64) -> f64,
        exact: fn(f64) -> f64,
        skip: usize,
    ) -> f64 {
        let g = make_grid(-6.0, 6.0, n, Boundary::Dirichlet).unwrap();
        let psi = Wavefunction::from_fn(g, 0.0, |x| Complex64::new(f(x), 0.0)).unwrap();
        let out = op(&psi);
        (skip..n - skip)
            .map(|j| (out.amplitudes()[j].re - exact(g.x(j))).abs())
            .fold(0.0, f64::max)
    }

    fn observed_orders(errs: &[f64]) -> Vec<f64> {
        errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let f = |x: f64| (-x * x).exp();
        let d2 = |x: f64| (4.0 * x * x - 2.0) * (-x * x).exp();
        let errs: Vec<f64> =
            [121, 241, 481].iter().map(|&n| max_err(n, &laplacian, f, d2, 1)).collect();
        for p in observed_orders(&errs) {
            assert!((p - 2.0).abs() < 0.1, "order {p}");
        }
    }

    #[test]
    fn derivative_of_parabola_converges_at_second_order() {
        // x² is not zero at the box edges, so skip the two nodes next to the
        // clamped endpoints; on a parabola the interior stencil is exact, so
        // use a Gaussian-weighted cubic to get a genuine truncation error.
        let f = |x: f64| x * x + x * x * x * (-x * x / 8.0).exp();
        let d = |x: f64| {
            2.0 * x + (3.0 * x * x - x.powi(4) / 4.0) * (-x * x / 8.0).exp()
        };
        let errs: Vec<f64> =
            [121, 241, 481].iter().map(|&n| max_err(n, &first_derivative, f, d, 2)).collect();
        for p in observed_orders(&errs) {
            assert!((p - 2.0).abs() < 0.1, "order {p}");
        }
        let exact = max_err(121, &first_derivative, |x| x * x, |x| 2.0 * x, 2);
        assert!(exact < 1e-12);
    }

    #[test]
    fn gaussian_quadrature_matches_sqrt_pi() {
        let g = make_grid(-10.0, 10.0, 201, Boundary::Dirichlet).unwrap();
        let psi = Wavefunction::from_fn(g, 0.0, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let s = inner_product(&psi, &psi).unwrap();
        assert!((s.re - PI.sqrt()).abs() < 1e-8);
    }
}
