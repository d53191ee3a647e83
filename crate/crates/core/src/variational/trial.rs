use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavefunction::{normalize, Wavefunction};

/// Maps parameters and a grid to an unnormalized state.
pub type BuildFn = Arc<dyn Fn(&[f64], &Grid) -> Result<Wavefunction> + Send + Sync>;

/// Parameterized family of trial states. [`TrialFamily::build`] always
/// returns a normalized state.
#[derive(Clone)]
pub struct TrialFamily {
    name: String,
    parameter_names: Vec<String>,
    bounds: Vec<(f64, f64)>,
    build: BuildFn,
}

impl fmt::Debug for TrialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrialFamily")
            .field("name", &self.name)
            .field("parameter_names", &self.parameter_names)
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

impl TrialFamily {
    pub fn new(
        name: impl Into<String>,
        parameter_names: Vec<String>,
        bounds: Vec<(f64, f64)>,
        build: BuildFn,
    ) -> Result<Self> {
        if parameter_names.len() != bounds.len() {
            return Err(Error::LengthMismatch { expected: parameter_names.len(), got: bounds.len() });
        }
        if bounds.iter().any(|(lo, hi)| lo.is_nan() || hi.is_nan() || lo > hi) {
            return Err(Error::InvalidParameter("trial bounds must be ordered intervals".into()));
        }
        Ok(Self { name: name.into(), parameter_names, bounds, build })
    }

    /// ψ ∝ exp(−(x − center)²/4σ²); parameters `center`, `sigma`.
    pub fn gaussian() -> Self {
        Self::gaussian_family("gaussian", false)
    }

    /// Gaussian times `exp(i·wavenumber·x)`.
    pub fn gaussian_with_phase() -> Self {
        Self::gaussian_family("gaussian_with_phase", true)
    }

    fn gaussian_family(name: &str, phase: bool) -> Self {
        let mut names = vec!["center".to_string(), "sigma".to_string()];
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY), (1e-3, 1e3)];
        if phase {
            names.push("wavenumber".into());
            bounds.push((f64::NEG_INFINITY, f64::INFINITY));
        }
        let build: BuildFn = Arc::new(move |p: &[f64], grid: &Grid| {
            let (c, s) = (p[0], p[1]);
            let k = if phase { p[2] } else { 0.0 };
            Wavefunction::from_fn(*grid, 0.0, |x| {
                Complex64::from_polar((-(x - c).powi(2) / (4.0 * s * s)).exp(), k * x)
            })
        });
        Self::new(name, names, bounds, build).expect("static family is well formed")
    }

    /// `sin(π u) + Σ_k c_k sin(kπ u)` with `u = (x − left)/(right − left)`,
    /// zero outside the box; parameters `c2 … c{modes}`.
    pub fn box_sine(left: f64, right: f64, modes: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidParameter(format!("box [{left}, {right}] is empty")));
        }
        if modes < 2 {
            return Err(Error::InvalidParameter("box_sine needs at least 2 modes".into()));
        }
        let names = (2..=modes).map(|k| format!("c{k}")).collect::<Vec<_>>();
        let bounds = vec![(-10.0, 10.0); modes - 1];
        let build: BuildFn = Arc::new(move |p: &[f64], grid: &Grid| {
            Wavefunction::from_fn(*grid, 0.0, |x| {
                if x <= left || x >= right {
                    return Complex64::new(0.0, 0.0);
                }
                let u = std::f64::consts::PI * (x - left) / (right - left);
                let v = u.sin() + p.iter().enumerate().map(|(i, c)| c * ((i + 2) as f64 * u).sin()).sum::<f64>();
                Complex64::new(v, 0.0)
            })
        });
        Self::new("box_sine", names, bounds, build)
    }

    /// The same family with parameter `name` pinned to `value`.
    pub fn with_frozen(&self, name: &str, value: f64) -> Result<Self> {
        let idx = self
            .parameter_names
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown trial parameter {name}")))?;
        let (lo, hi) = self.bounds[idx];
        if !(value.is_finite() && lo <= value && value <= hi) {
            return Err(Error::InvalidParameter(format!("{name} = {value} is outside [{lo}, {hi}]")));
        }
        let inner = self.build.clone();
        let build: BuildFn = Arc::new(move |p: &[f64], grid: &Grid| {
            let mut full = p.to_vec();
            full.insert(idx, value);
            inner(&full, grid)
        });
        let mut names = self.parameter_names.clone();
        names.remove(idx);
        let mut bounds = self.bounds.clone();
        bounds.remove(idx);
        Self::new(format!("{}[{name}={value}]", self.name), names, bounds, build)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameter_names(&self) -> &[String] {
        &self.parameter_names
    }

    pub fn parameter_bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: params.len() });
        }
        for ((p, (lo, hi)), name) in params.iter().zip(&self.bounds).zip(&self.parameter_names) {
            if !(p.is_finite() && lo <= p && p <= hi) {
                return Err(Error::InvalidParameter(format!("{name} = {p} is outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Normalized member of the family.
    pub fn build(&self, params: &[f64], grid: &Grid) -> Result<Wavefunction> {
        self.check(params)?;
        normalize(&(self.build)(params, grid)?)
    }
}
