//! Numerical laboratory for Dirac operators on thin tubular neighbourhoods of
//! surfaces of revolution in flat three-space.
//!
//! The pipeline runs from a profile curve ([`geometry`]) to sparse Hermitian
//! operator matrices ([`operators`]), through eigen-solvers and index counts
//! ([`spectral`]), to convergence studies ([`analysis`]) driven from the
//! command line ([`cli`]).

pub mod analysis;
pub mod cli;
mod error;
pub mod geometry;
pub mod operators;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
