//! Complex amplitudes on a grid, quadrature inner products and normalization.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Complex scalar returned by quadratures.
pub type ComplexScalar = Complex64;

/// Sampled wavefunction at one time instant.
///
/// On Dirichlet grids the endpoint amplitudes are always exactly zero; the
/// constructors enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl Wavefunction {
    pub fn new(grid: Grid, mut amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: amplitudes.len() });
        }
        if !time.is_finite() {
            return Err(Error::NonFinite("wavefunction time".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("wavefunction amplitudes".into()));
        }
        clamp(&grid, &mut amplitudes);
        Ok(Self { grid, amplitudes, time })
    }

    /// Sample `f` at every node.
    pub fn from_fn<F>(grid: Grid, time: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let amps = (0..grid.len()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, amps, time)
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self { grid, amplitudes: vec![Complex64::new(0.0, 0.0); grid.len()], time }
    }

    /// Internal constructor for amplitudes produced by finite arithmetic on
    /// already-validated states.
    pub(crate) fn from_parts(grid: Grid, mut amplitudes: Vec<Complex64>, time: f64) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.len());
        clamp(&grid, &mut amplitudes);
        Self { grid, amplitudes, time }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// True when every amplitude is finite.
    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise |Ψ|².
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Quadrature of |Ψ|².
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, z)| self.grid.weight(j) * z.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `c · Ψ`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(self.grid, self.amplitudes.iter().map(|z| c * z).collect(), self.time)
    }

    /// `self + c · other`, keeping `self`'s time stamp.
    pub fn add_scaled(&self, c: Complex64, other: &Wavefunction) -> Result<Self> {
        same_grid(self, other)?;
        let amps = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self::from_parts(self.grid, amps, self.time))
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_parts(self.grid, self.amplitudes.iter().map(|z| z.conj()).collect(), self.time)
    }

    /// Pointwise multiplication by a real field.
    pub fn multiply_real(&self, field: &[f64]) -> Result<Self> {
        if field.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: field.len() });
        }
        let amps = self.amplitudes.iter().zip(field).map(|(z, v)| z * v).collect();
        Ok(Self::from_parts(self.grid, amps, self.time))
    }

    /// Midpoint state ½(a + b) stamped at the mean time.
    pub fn midpoint(a: &Wavefunction, b: &Wavefunction) -> Result<Self> {
        same_grid(a, b)?;
        let amps = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| 0.5 * (x + y)).collect();
        Ok(Self::from_parts(a.grid, amps, 0.5 * (a.time + b.time)))
    }
}

fn clamp(grid: &Grid, amps: &mut [Complex64]) {
    let n = amps.len();
    if grid.is_clamped(0) {
        amps[0] = Complex64::new(0.0, 0.0);
        amps[n - 1] = Complex64::new(0.0, 0.0);
    }
}

pub(crate) fn same_grid(a: &Wavefunction, b: &Wavefunction) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Quadrature of conj(bra)·ket.
pub fn inner_product(bra: &Wavefunction, ket: &Wavefunction) -> Result<ComplexScalar> {
    same_grid(bra, ket)?;
    Ok(weighted_dot(&bra.grid, &bra.amplitudes, &ket.amplitudes))
}

pub(crate) fn weighted_dot(grid: &Grid, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter()
        .zip(ket)
        .enumerate()
        .map(|(j, (a, b))| a.conj() * b * grid.weight(j))
        .sum()
}

/// Rescale to unit quadrature norm by a positive real factor.
pub fn normalize(psi: &Wavefunction) -> Result<Wavefunction> {
    let n2 = psi.norm_squared();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(psi.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
}
