//! Diagonalization of n-body quadratic Hamiltonians in the original
//! position and momentum observables.
//!
//! A quadratic Hamiltonian `H = Σ pᵢ²/2mᵢ + Σ dᵢuᵢ² + Σ_{i<j} dᵢⱼuᵢuⱼ` is
//! brought to diagonal form by a sequence of unit-determinant shear pair
//! transformations. Unlike a normal-mode transformation, the result stays
//! expressed in the original observables: the couplings are absorbed into
//! effective masses `m̃ᵢ` and effective force constants `d̃ᵢ`, with
//! per-particle frequencies `ωᵢ² = 2d̃ᵢ/m̃ᵢ`.
//!
//! The crate is organised around a handful of modules:
//!
//! * [`model`] - Hamiltonian data model, symmetrization, chain builders.
//! * [`normal_modes`] - the classical eigendecomposition oracle (Jacobi),
//!   closed-form chain spectra and zero-point energies.
//! * [`shear`] - pair transformations, their coordinate/momentum maps, and
//!   the closed-form shear parameters.
//! * [`diagonalizer`] - closed-form two-body, pairwise-chain and Bravais
//!   diagonalizations, the staged three-body solver, and an iterative sweep
//!   for general `n`.
//! * [`states`] - Gaussian ground states, ladder operators, commutators and
//!   the zero-point-energy comparison harness.
//!
//! The core is `no_std`-compatible (`alloc` required): disable default
//! features and enable `libm` for builds without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("quadham-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod diagonalizer;
pub mod error;
mod math;
pub mod matrix;
pub mod model;
pub mod normal_modes;
pub mod shear;
pub mod states;

pub use error::{Error, Result};
pub use matrix::Mat;
pub use model::{KPForm, QuadHamiltonian};
