//! Simulation of deterministic polarization-entangled photon-pair generation
//! by a tripod atom passing through two polarization-degenerate cavities.
//!
//! The atom starts in |g⟩ with cavity 1 empty and cavity 2 holding one photon
//! per polarization. Two stimulated Raman adiabatic passages, driven by a
//! common pump, leave one photon in each cavity in the EPR state
//! (|10⟩₁|01⟩₂ + |01⟩₁|10⟩₂)/√2 with the atom back in |g⟩.
//!
//! Modules:
//! - [`hilbert`]: truncated composite space, ladder and transition operators.
//! - [`model`]: pulses, interaction Hamiltonian, named basis, dark states.
//! - [`dynamics`]: Schrödinger, Lindblad and quantum-trajectory solvers.
//! - [`observables`]: populations, success probability, fidelity, diagnostics.
//! - [`experiments`]: configuration, scenario runs, sweeps, CSV export.

pub mod error;
pub mod hilbert;
pub mod dynamics;
pub mod experiments;
pub mod model;
pub mod observables;

pub use error::{Error, Result};
