//! Self-consistent solver for coupled mean-field and BCS-type gap equations,
//! with phase-diagram sweeps, an exact Fock-space oracle for the thermal
//! kernels, and a probe of the Gaussian-smearing scaling limit.

pub mod error;
pub mod config;
pub mod grid;
pub mod oracle;
pub mod phase;
pub mod runner;
pub mod scaling;
pub mod solver;
pub mod thermal;
