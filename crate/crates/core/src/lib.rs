//! Numerical lab for complex geometric optics (CGO) solutions of magnetic
//! Schrödinger operators on planar domains, and for checking boundary
//! stability of the inverse problem on small grids.
//!
//! Layout follows the dependency order of the computation:
//! fields on polar grids, Cauchy transforms, holomorphic phases,
//! the forward Dirichlet problem, the first-order Dirac reduction with
//! its CGO solver, boundary-data metrics, holonomy diagnostics and the
//! experiment drivers.

pub mod cauchy;
pub mod dirac;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod forward;
pub mod geometry;
pub mod holonomy;
pub mod metrics;
pub mod phase;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
