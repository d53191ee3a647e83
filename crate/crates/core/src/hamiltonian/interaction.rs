use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::Grid;
use crate::hamiltonian::PotentialField;
use crate::wavefunction::Wavefunction;

/// Symmetric two-body kernel sampled on grid pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    /// Row-major `n × n` values; must be symmetric.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interaction kernel".into()));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i + 1..n {
                if (values[i * n + j] - values[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "two-body kernel is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Sample `v(x, x′)` on every node pair.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Grid, v: F) -> Result<Self> {
        let n = grid.len();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(v(grid.x(i), grid.x(j)));
            }
        }
        Self::new(n, values)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionKind {
    /// g·δ(x − x′).
    Contact { g: f64 },
    Kernel(Arc<KernelMatrix>),
}

/// Pairwise interaction among `particles` identical bosons.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyInteraction {
    kind: InteractionKind,
    particles: usize,
}

impl TwoBodyInteraction {
    pub fn contact(g: f64, particles: usize) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::InvalidParameter(format!("contact strength must be finite, got {g}")));
        }
        Self::checked(InteractionKind::Contact { g }, particles)
    }

    pub fn kernel(kernel: KernelMatrix, particles: usize) -> Result<Self> {
        Self::checked(InteractionKind::Kernel(Arc::new(kernel)), particles)
    }

    fn checked(kind: InteractionKind, particles: usize) -> Result<Self> {
        if particles == 0 {
            return Err(Error::InvalidParameter("particle count must be >= 1".into()));
        }
        Ok(Self { kind, particles })
    }

    pub fn kind(&self) -> &InteractionKind {
        &self.kind
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// The (N − 1) multiplicity of the mean-field term.
    pub fn pair_factor(&self) -> f64 {
        (self.particles - 1) as f64
    }

    /// True when the mean field vanishes identically.
    pub fn is_trivial(&self) -> bool {
        self.particles == 1 || matches!(self.kind, InteractionKind::Contact { g } if g == 0.0)
    }
}

/// Mean-field potential (N − 1)∫V⁽²⁾(x, x′)|φ(x′)|² dx′ felt by one particle.
pub fn mean_field_potential(interaction: &TwoBodyInteraction, phi: &Wavefunction) -> Result<PotentialField> {
    Ok(PotentialField::sampled(mean_field_values(interaction, phi, Exec::default())?))
}

/// Node values of the mean-field potential.
pub fn mean_field_values(
    interaction: &TwoBodyInteraction,
    phi: &Wavefunction,
    exec: Exec,
) -> Result<Vec<f64>> {
    let norm2 = phi.norm_squared();
    if (norm2 - 1.0).abs() > 1e-6 {
        log::warn!("mean field built from a state with norm² = {norm2}");
    }
    mean_field_from_density(interaction, phi.grid(), &phi.density(), exec)
}

pub(crate) fn mean_field_from_density(
    interaction: &TwoBodyInteraction,
    grid: &Grid,
    density: &[f64],
    exec: Exec,
) -> Result<Vec<f64>> {
    let factor = interaction.pair_factor();
    match &interaction.kind {
        InteractionKind::Contact { g } => Ok(density.iter().map(|r| factor * g * r).collect()),
        InteractionKind::Kernel(k) => {
            if k.dim() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), got: k.dim() });
            }
            let weighted: Vec<f64> =
                density.iter().enumerate().map(|(j, r)| r * grid.weight(j)).collect();
            Ok(exec.map_range(grid.len(), |i| {
                let s: f64 = k.row(i).iter().zip(&weighted).map(|(v, w)| v * w).sum();
                factor * s
            }))
        }
    }
}
