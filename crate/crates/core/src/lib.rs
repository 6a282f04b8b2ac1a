//! Exact-diagonalization workbench for local Hamiltonian decision problems.
//!
//! The crate builds k-local Hamiltonians, answers promise-problem queries
//! about them with an exact spectral oracle, runs the oracle-query
//! algorithms for EXACT-LH, APPROX-SIMULATION and SPECTRAL GAP, constructs
//! the matching hardness Hamiltonians, and compiles verifier circuits into
//! clock Hamiltonians.

pub mod cli;
pub mod clock;
pub mod error;
pub mod gen;
pub mod ham;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod reductions;
pub mod solvers;
pub mod spectral;
pub mod verify;

pub use error::{HamError, Result};
pub use ham::{LocalHamiltonian, LocalTerm, Observable, Placement, Representation};
