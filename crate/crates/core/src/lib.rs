//! Numerical laboratory for the exterior problem of the fractional
//! Schrödinger operator `(-Δ)^s + q` on a truncated lattice.
//!
//! The crate discretizes the fractional Laplacian as a dense symmetric
//! matrix power of the truncated second-order stencil, solves the exterior
//! Dirichlet problem, assembles exterior Dirichlet-to-Neumann maps, and
//! builds the inverse-problem machinery on top: Tikhonov-regularized
//! exterior controls, linearized and iterative potential reconstruction,
//! the Caffarelli–Silvestre extension solver with its weighted Neumann
//! trace, and the quantitative studies (antilocality spectra, singular
//! value decay, stability curves).
//!
//! Everything is `no_std`-compatible (`alloc` required); file formats,
//! configuration, and the command line live in the companion `fraclab-cli`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

use alloc::string::String;
use core::fmt;

pub mod control;
pub mod csext;
pub mod dnmap;
pub mod experiments;
pub mod forward;
pub mod fracop;
pub mod grid;
pub mod inversion;
pub(crate) mod linalg;
pub mod profiles;
pub(crate) mod scalar;

pub use grid::{Grid, GridFunction, HyperBox, RegionPartition};

/// Error type shared by every solver and assembly routine in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A grid or region description violates its invariants; the message
    /// names the offending quantity.
    InvalidGeometry(String),
    /// Vector/matrix sizes are inconsistent with the grid or region.
    IndexMismatch { expected: usize, got: usize },
    /// The symmetric eigensolver did not converge.
    EigendecompositionFailure,
    /// The singular value decomposition did not converge.
    SvdFailure,
    /// The interior operator is numerically singular: zero is an exterior
    /// Dirichlet eigenvalue at the working tolerance.
    IllPosed { sigma_min: f64, tol: f64 },
    /// An iterative reconstruction produced an iterate whose interior
    /// operator is singular, and step halving could not recover.
    IllPosedAtIterate { iteration: usize, sigma_min: f64, tol: f64 },
    /// A linear system was too ill-conditioned to factor.
    NumericalFailure(String),
    /// Unregularized reconstruction was requested but the linearized map
    /// has numerical rank below the number of unknowns.
    InsufficientData { rank: usize, needed: usize },
    /// The degenerate weight was evaluated at y = 0.
    SingularWeight,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::IndexMismatch { expected, got } => {
                write!(f, "index mismatch: expected length {expected}, got {got}")
            }
            Error::EigendecompositionFailure => {
                write!(f, "symmetric eigendecomposition did not converge")
            }
            Error::SvdFailure => write!(f, "singular value decomposition did not converge"),
            Error::IllPosed { sigma_min, tol } => write!(
                f,
                "ill-posed interior problem: sigma_min = {sigma_min:e} below tolerance {tol:e}"
            ),
            Error::IllPosedAtIterate {
                iteration,
                sigma_min,
                tol,
            } => write!(
                f,
                "iterate {iteration} is ill-posed after step halving: sigma_min = {sigma_min:e} (tol {tol:e})"
            ),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::InsufficientData { rank, needed } => write!(
                f,
                "insufficient data: linearized map has rank {rank} < {needed} unknowns and no regularization was requested"
            ),
            Error::SingularWeight => write!(f, "degenerate weight evaluated at y = 0"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
