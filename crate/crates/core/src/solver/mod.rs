//! Radial Crank–Nicolson integrator for the Schrödinger–Newton equations of
//! both kaon scenarios, and the doublet-formalism residual checker.
//!
//! Wave functions are stored as u = rψ on a uniform grid with Dirichlet
//! ends. Physical kaon couplings (~10⁻⁵⁵) are invisible in double
//! precision, so runs use an inflated `newton_g`.

mod doublet;
mod evolve;
mod grid;
mod output;
mod poisson;

pub use doublet::{
    doublet_residuals, doublet_residuals_with_derivatives, shared_wavefunction_gap, DoubletMatrices,
    DoubletResiduals,
};
pub use evolve::{
    evolve, evolve_with_state, measured_mass_difference_shift, phase_shift_measurement, potentials, step,
    ChannelSeries, Corrector, EvolutionResult, PhaseConvention, PhaseShiftMeasurement, ScenarioConfig,
    SolverState,
};
pub use grid::{gaussian_at, init_gaussian, RadialGrid, RadialWaveFunction};
pub use poisson::{self_potential, shell_kernel, Source};
