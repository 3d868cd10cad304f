//! Virtual-particle lattice processes in 1+1 dimensional space-time.
//!
//! Four deterministic master equations on a periodic ring of sites, whose
//! continuum limits are the free Schrödinger, Dirac, Klein-Gordon and photon
//! equations:
//!
//! * [`lattice`]: geometry, scalings, species storage and initial conditions.
//! * [`processes`]: the exact one-step update rules and the run loop.
//! * [`oracle`]: closed-form continuum solutions and dispersion relations.
//! * [`analysis`]: per-mode update matrices, lattice dispersion, convergence
//!   studies, drift and census diagnostics.
//! * [`config`] and [`cli`]: the batch front end and its file formats.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod lattice;
pub mod oracle;
pub mod processes;

pub use error::{Error, Result};
pub use lattice::{
    Count, InitialCondition, LatticeSpec, PlaneWaveBranch, ProcessKind, ProcessState, Scaling,
    Species, SpeciesField,
};
pub use processes::{run, step, StepReport};
