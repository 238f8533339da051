//! Numerical core for a polarization-based quantum random number generator.
//!
//! Everything here is pure computation on small dense matrices (dimension 2
//! for one photon, 4 for a photon pair):
//!
//! - [`linalg`]: complex matrices, Kronecker products, partial traces and a
//!   Jacobi eigensolver for Hermitian input.
//! - [`state`]: validated density matrices, coherence, fidelity, and the
//!   HH/VV subspace restriction.
//! - [`optics`]: Jones-calculus analyzers, source models and seeded count
//!   simulation.
//! - [`tomography`]: Stokes-parameter estimation, linear inversion and
//!   projection onto the physical state set.
//! - [`audit`]: min-entropy (empirical and coherence bound), CHSH, and the
//!   combined [`audit::AuditReport`].
//! - [`bits`]: bit generation and randomness extraction (von Neumann,
//!   Toeplitz hashing).
//! - [`reference`]: measured matrices and reference values used for
//!   reproduction checks.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the CLI
//! live in the `qrng` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod bits;
mod error;
pub mod linalg;
mod math;
mod ntt;
pub mod optics;
pub mod reference;
pub mod rng;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, Factor};
pub use num_complex::Complex64;
pub use state::{DensityMatrix, FidelityConvention, PureState, TensorOrder};
