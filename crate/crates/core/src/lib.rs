//! Newtonian self-gravity (Schrödinger–Newton) in the neutral kaon system.
//!
//! * [`units`]: constants, kaon defaults, SI <-> natural units (ħ = c = 1, MeV).
//! * [`flavor`]: the 2×2 mixing Hamiltonian, ε, oscillation probabilities,
//!   CSL damping and the self-gravity rescaling of Δm.
//! * [`gravity`]: closed-form self-potentials of free Gaussians, their
//!   expansions, expectation values and energy shifts.
//! * [`solver`]: Crank–Nicolson integrator for the radial coupled
//!   Schrödinger–Newton equations and the doublet consistency checker.

pub mod error;
pub mod flavor;
pub mod gravity;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use units::{default_kaon_parameters, KaonParameters};
