//! Polar grids on disks and annuli, fields and forms sampled on them, and
//! the discrete exterior calculus used everywhere else.

pub mod calculus;
pub mod field;
pub mod grid;
pub mod interp;
pub mod loops;
pub mod snapshot;
pub mod stencil;

pub use calculus::{
    codiff, d0, d1, dbar, dbar1, dbar_star, inner0, inner1, inner2, laplacian, partial, partial1, partial_star,
    star0, star1, star2, wedge, wirtinger, LaplacianRoute,
};
pub use field::{OneForm, ScalarField, TwoForm};
pub use grid::{Domain, PolarGrid};
pub use loops::{loop_quadrature, Loop};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
