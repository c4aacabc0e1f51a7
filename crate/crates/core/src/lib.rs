//! Configuration-space toolkit for the spin-J XXZ chain in the Ising phase.
//!
//! The chain is represented through particle configurations: a spin-down
//! deviation at a site counts as a particle, each site holds up to `2J` of
//! them, and the Hamiltonian splits into one block per particle number. On
//! each block it acts as a weighted hopping term plus a potential that
//! counts broken bonds.
//!
//! Modules, roughly bottom-up:
//!
//! - [`config_space`]: occupation functions, particle tuples, adjacency,
//!   potentials, graph distance, minimizers and building blocks.
//! - [`operators`]: sparse sector operators and the full tensor Hamiltonian.
//! - [`spectral`]: dense eigensolvers, spectral projections and
//!   Combes–Thomas measurements.
//! - [`entanglement`]: bipartitions, partial traces and entropies.
//! - [`bounds`]: the analytic constants and right-hand sides that the
//!   measured quantities are compared against.

pub mod bounds;
pub mod config_space;
pub mod entanglement;
pub mod error;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
