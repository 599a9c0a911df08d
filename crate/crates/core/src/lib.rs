//! Thermalization of a target qubit through repeated collisions with
//! clusters of N bath qubits.
//!
//! The crate builds collective spin operators in an excitation-sorted product
//! basis, constructs and classifies bath states, extracts the coefficients of
//! the target-qubit master equation from collective-spin moments, and evolves
//! the qubit either in closed form, by integrating the master equation, or by
//! simulating the collisions directly.

pub mod bath;
pub mod cli;
pub mod coefficients;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod spin;

pub use bath::{BathKind, BathSpec, Coherence, CoherenceMap};
pub use coefficients::{CollisionParams, MeqCoefficients};
pub use dynamics::{QubitState, Trajectory};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, C64};
