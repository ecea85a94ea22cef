//! Reference-element machinery and the coupled u–p element kernel.

mod kernel;
mod quadrature;
mod shape;

pub use kernel::{
    b_matrix, element_matrices, tau_gls, ElementInput, ElementMatrices, GlsParams, ELEMENT_DOFS_P,
    ELEMENT_DOFS_U,
};
pub use quadrature::{quadrature_tet4pt, quadrature_tri3pt, QuadratureRule};
pub use shape::{
    shape_tet10, shape_tet4, shape_tri6, ShapeEval, ShapeKind, TET10_EDGES, TRI6_EDGES,
};
