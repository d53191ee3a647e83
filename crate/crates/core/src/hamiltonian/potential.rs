use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Position- and time-dependent callable, `f(x, t)`.
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A real scalar field on the line: one-body potential, scalar potential A₀
/// or the single component of the vector potential.
#[derive(Clone, Default)]
pub enum PotentialField {
    #[default]
    Zero,
    Constant(f64),
    /// ½·stiffness·(x − center)².
    Harmonic { stiffness: f64, center: f64 },
    /// strength·(x − center)⁴.
    Quartic { strength: f64, center: f64 },
    /// Zero on `[left, right]`, `height` outside.
    Box { left: f64, right: f64, height: f64 },
    /// Values at the grid nodes.
    Sampled(Arc<[f64]>),
    TimeDependent(FieldFn),
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Harmonic { stiffness, center } => {
                write!(f, "Harmonic {{ stiffness: {stiffness}, center: {center} }}")
            }
            Self::Quartic { strength, center } => {
                write!(f, "Quartic {{ strength: {strength}, center: {center} }}")
            }
            Self::Box { left, right, height } => {
                write!(f, "Box {{ left: {left}, right: {right}, height: {height} }}")
            }
            Self::Sampled(v) => write!(f, "Sampled(len = {})", v.len()),
            Self::TimeDependent(_) => write!(f, "TimeDependent(..)"),
        }
    }
}

impl PotentialField {
    /// ½·m·ω²·(x − center)².
    pub fn harmonic(mass: f64, omega: f64, center: f64) -> Self {
        Self::Harmonic { stiffness: mass * omega * omega, center }
    }

    pub fn sampled(values: Vec<f64>) -> Self {
        Self::Sampled(values.into())
    }

    pub fn time_dependent<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::TimeDependent(Arc::new(f))
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, Self::TimeDependent(_))
    }

    /// True when the field is identically zero by construction.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Constant(c) => *c == 0.0,
            Self::Sampled(v) => v.iter().all(|&x| x == 0.0),
            _ => false,
        }
    }

    /// Check parameters are finite.
    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            Self::Zero | Self::TimeDependent(_) => true,
            Self::Constant(c) => c.is_finite(),
            Self::Harmonic { stiffness, center } => stiffness.is_finite() && center.is_finite(),
            Self::Quartic { strength, center } => strength.is_finite() && center.is_finite(),
            Self::Box { left, right, height } => {
                left.is_finite() && right.is_finite() && height.is_finite() && left < right
            }
            Self::Sampled(v) => v.iter().all(|x| x.is_finite()),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("potential parameters not finite: {self:?}")))
        }
    }

    /// Value at a single point. Sampled fields need [`PotentialField::sample`].
    pub fn value_at(&self, x: f64, t: f64) -> Option<f64> {
        Some(match self {
            Self::Zero => 0.0,
            Self::Constant(c) => *c,
            Self::Harmonic { stiffness, center } => 0.5 * stiffness * (x - center).powi(2),
            Self::Quartic { strength, center } => strength * (x - center).powi(4),
            Self::Box { left, right, height } => {
                if (*left..=*right).contains(&x) {
                    0.0
                } else {
                    *height
                }
            }
            Self::Sampled(_) => return None,
            Self::TimeDependent(f) => f(x, t),
        })
    }

    /// Values at every node of `grid` at time `t`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<Vec<f64>> {
        let values = match self {
            Self::Sampled(v) => {
                if v.len() != grid.len() {
                    return Err(Error::LengthMismatch { expected: grid.len(), got: v.len() });
                }
                v.to_vec()
            }
            _ => (0..grid.len()).map(|j| self.value_at(grid.x(j), t).unwrap()).collect(),
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("potential {self:?} at t = {t}")));
        }
        Ok(values)
    }
}
