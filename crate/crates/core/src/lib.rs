//! Quantum and classical dynamics of the damped harmonic oscillator, built on
//! a doubled damped/amplified system with a constraint that keeps one damped
//! oscillation.
//!
//! The oscillator's instantaneous energy levels `hbar omega e^{-gamma t/m} (n + 1/2)`
//! decay in time, and the Schrodinger evolution induces transitions between
//! them. [`transitions`] computes the transition amplitudes three independent
//! ways; [`spectrum`] and [`wavefunction`] turn them into wave functions, and
//! [`classical`] covers the underlying classical trajectory and energy ledger.

pub mod classical;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod grid;
pub mod ode;
pub mod params;
pub mod spectrum;
pub mod transitions;
pub mod wavefunction;

pub use error::{DhoError, Result};
pub use grid::{GridKind, GridSpec};
pub use params::{classify, derive, derive_quantum, ClassicalRegime, DerivedParams, PhysParams, QuantumRegime};
