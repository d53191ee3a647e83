//! Least-action quantum mechanics on a one-dimensional grid.
//!
//! Schrödinger and Gross-Pitaevskii propagation, imaginary-time and
//! Rayleigh-Ritz ground states, action functionals and the conservation-law
//! diagnostics that tie them together.

pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod propagation;
pub mod variational;
pub mod wavefunction;

pub use diagnostics::{
    canonical_fields, continuity_residual, gauge_transform, hamilton_equations_residual,
    probability_fields, DiagnosticsRecord, DiagnosticsRecorder,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{make_grid, Boundary, Grid};
pub use hamiltonian::{
    apply_hamiltonian, apply_mechanical_momentum, chemical_potential, energy, hamiltonian_matrix,
    mean_field_potential, HamiltonianConfig, KineticStencil, PhysicalConstants, PotentialField,
    TwoBodyInteraction,
};
pub use propagation::{
    ground_state_imaginary_time, propagate, step_crank_nicolson, step_gp, GroundStateResult,
    NonlinearUpdate, Observer, PropagationPlan, Scheme, StepView, Trajectory,
};
pub use variational::{
    action, action_with, lagrangian_densities, rayleigh_ritz_minimize, stationarity_test,
    stationarity_test_with, ActionDensity,
    ActionValue, LagrangianSample, TrialFamily,
};
pub use wavefunction::{inner_product, normalize, ComplexScalar, Wavefunction};
