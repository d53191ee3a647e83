//! Uniform one-dimensional lattices.

use crate::error::{Error, Result};

/// Boundary convention of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Amplitudes are clamped to zero at both endpoints, which are grid nodes.
    Dirichlet,
    /// Indices wrap; `x_max` is identified with `x_min` and is not a node.
    Periodic,
}

/// A uniform lattice on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
    boundary: Boundary,
}

pub const MIN_POINTS: usize = 8;

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "empty interval: x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be >= {MIN_POINTS}, got {n_points}"
            )));
        }
        let cells = match boundary {
            Boundary::Dirichlet => n_points - 1,
            Boundary::Periodic => n_points,
        };
        let dx = (x_max - x_min) / cells as f64;
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing underflow (dx = {dx})")));
        }
        Ok(Self { x_min, x_max, n_points, dx, boundary })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Length of the domain.
    pub fn extent(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Coordinate of node `j`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Quadrature weight of node `j`: trapezoidal for Dirichlet, rectangle
    /// for periodic grids.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet if j == 0 || j + 1 == self.n_points => 0.5 * self.dx,
            _ => self.dx,
        }
    }

    /// True for nodes whose amplitude is pinned to zero.
    #[inline]
    pub fn is_clamped(&self, j: usize) -> bool {
        self.boundary == Boundary::Dirichlet && (j == 0 || j + 1 == self.n_points)
    }

    /// Index of the node `offset` sites away from `j`, or `None` when it falls
    /// outside a Dirichlet box.
    #[inline]
    pub fn neighbor(&self, j: usize, offset: isize) -> Option<usize> {
        let n = self.n_points as isize;
        let k = j as isize + offset;
        match self.boundary {
            Boundary::Periodic => Some(k.rem_euclid(n) as usize),
            Boundary::Dirichlet => (0..n).contains(&k).then_some(k as usize),
        }
    }

    /// Quadrature of sampled real data.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(j, v)| self.weight(j) * v).sum()
    }
}

/// Build a grid, validating the bounds and point count.
pub fn make_grid(x_min: f64, x_max: f64, n_points: usize, boundary: Boundary) -> Result<Grid> {
    Grid::new(x_min, x_max, n_points, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_spacing() {
        let g = make_grid(-10.0, 10.0, 201, Boundary::Dirichlet).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.x(200), 10.0);
    }

    #[test]
    fn periodic_spacing() {
        let g = make_grid(0.0, 1.0, 8, Boundary::Periodic).unwrap();
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.neighbor(7, 1), Some(0));
        assert_eq!(g.neighbor(0, -2), Some(6));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            make_grid(5.0, 5.0, 100, Boundary::Dirichlet),
            Err(Error::InvalidGrid(_))
        ));
        assert!(make_grid(0.0, 1.0, 7, Boundary::Dirichlet).is_err());
        assert!(make_grid(f64::NAN, 1.0, 16, Boundary::Dirichlet).is_err());
        assert!(make_grid(0.0, f64::INFINITY, 16, Boundary::Periodic).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_extent() {
        let g = make_grid(-3.0, 5.0, 33, Boundary::Dirichlet).unwrap();
        let total: f64 = (0..g.len()).map(|j| g.weight(j)).sum();
        assert!((total - 8.0).abs() < 1e-13);
        assert_eq!(g.neighbor(0, -1), None);
    }
}
