//! Finite-strain biphasic porous media with Taylor-Hood tetrahedra.
//!
//! The crate models a saturated mixture of a compressible Neo-Hookean solid
//! skeleton and an intrinsically incompressible ideal fluid. Displacements are
//! interpolated with ten-node (quadratic) tetrahedra, pore pressure with the
//! four corner nodes (linear). The optional Galerkin least-squares term
//! suppresses the spurious pressure oscillations that appear next to drained
//! boundaries at low permeability.
//!
//! Everything here is pure computation and builds without `std`; file formats,
//! the command line and the production sparse factorization live in the
//! companion `biphasic` crate.
//!
//! Units are fixed throughout: mm, N, s, MPa (= N/mm²). Permeability is in
//! mm⁴ N⁻¹ s⁻¹.
#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod element;
pub mod error;
pub mod linsolve;
pub mod material;
pub(crate) mod math;
pub mod mesh;
pub mod oracle;
pub mod postprocess;
pub mod scenario;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
