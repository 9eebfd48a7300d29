// SPDX-License-Identifier: Apache-2.0

//! Simulation of a single-step controlled-phase gate in which one control
//! qutrit drives a phase flip on `n - 1` target qutrits through a shared,
//! dispersively coupled cavity mode.
//!
//! Modules, bottom up:
//!
//! * [`operators`]: dense complex matrices, states, density matrices.
//! * [`space`]: tensor-product layout and basis indexing.
//! * [`model`]: parameters and the full, dispersive and effective Hamiltonians.
//! * [`gate`]: encoding, the target gate and its closed-form realization.
//! * [`dynamics`]: Schrödinger and Lindblad evolution, fidelities.
//! * [`experiments`]: sweeps, validation suite, config and CSV output.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gate;
pub mod integrator;
pub mod model;
pub mod operators;
pub mod space;

pub use dynamics::{
    convergence_study, evolve_lindblad, evolve_schrodinger, gate_fidelity_ideal, gate_fidelity_lossy,
    EvolutionConfig, GateOutcome, Trajectory,
};
pub use error::{Error, Result};
pub use gate::{closed_form_unitary, encode, ideal_gate_matrix, ideal_output_state, superposition_input};
pub use model::{derive, matched_mu, DerivedParams, SystemParams};
pub use operators::{ComplexMatrix, DensityMatrix, QuantumState};
pub use space::{HilbertSpace, Level, Site};
