//! Spectral-Galerkin discretizations of the Laplacian under moment and
//! harmonic-orthogonality constraints on the unit cube, the H^-1 machinery
//! they live in, and the associated heat semigroups.

pub mod checks;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod galerkin;
pub mod harmonic;
pub mod hminus;
pub mod oracles;
pub mod quadrature;

pub use error::{Error, Result};
