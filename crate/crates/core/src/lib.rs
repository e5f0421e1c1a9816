//! Spin-j quantum dynamics under coarse-grained measurement.
//!
//! The crate models a spin-j system in the Dicke (J_z eigen) basis and
//! provides the pieces needed to test macroscopic realism numerically:
//!
//! - [`spin`]: operators, coherent states, Hamiltonians and spectral time
//!   evolution.
//! - [`quasiprob`]: Q- and P-functions on product quadrature grids, region
//!   integrals and the distribution overlap.
//! - [`measure`]: slot partitions, diagonal POVMs and their Hermitean Kraus
//!   operators.
//! - [`lab`]: Leggett-Garg protocols (sharp and coarse-grained), the
//!   mixture / evolution / sufficiency conditions and Hamiltonian
//!   classification.
//! - [`circuit`]: an N-qubit statevector that builds the cat evolution from
//!   single-qubit rotations and c-not chains, with gate accounting.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is deterministic
//! and all types are immutable after construction unless stated otherwise.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod circuit;
mod error;
pub mod lab;
pub mod linalg;
pub mod measure;
pub mod quasiprob;
pub mod special;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
