//! Error type shared by all modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by validation and by the iterative solvers.
///
/// Particle indices carried by errors are 0-based, matching the library API.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input failed validation (shape, finiteness, ranges, sizes).
    Invalid(String),
    /// A matrix expected to be symmetric exceeded the symmetry tolerance.
    NotSymmetric { max_asymmetry: f64 },
    /// A matrix expected to be positive definite was not.
    NotPositiveDefinite,
    /// A coupling is present outside the requested disjoint pairs.
    NotPairDecoupled { i: usize, j: usize, value: f64 },
    /// Some squared frequencies are negative; carries the offending values.
    UnstablePotential { omega_sq: Vec<f64> },
    /// An iterative solver exhausted its budget; carries the last residual.
    NoConvergence { residual: f64, iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {max_asymmetry:e})")
            }
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::NotPairDecoupled { i, j, value } => write!(
                f,
                "not pair-decoupled: coupling d[{i},{j}] = {value:e} lies outside the given pairs"
            ),
            Error::UnstablePotential { omega_sq } => {
                write!(f, "unstable potential: negative squared frequencies {omega_sq:?}")
            }
            Error::NoConvergence { residual, iterations } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl fmt::Display) -> Error {
    Error::Invalid(alloc::format!("{msg}"))
}
