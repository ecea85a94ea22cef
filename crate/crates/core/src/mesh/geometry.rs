use nalgebra::Vector3;

use crate::element::{quadrature_tet4pt, shape_tet10};
use crate::error::{Error, Result};

/// Minimum |signed volume| (mm³) below which a tetrahedron is degenerate.
pub const EPS_VOLUME: f64 = 1e-12;

#[inline]
pub(crate) fn v3(p: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2])
}

/// Signed volume of the corner tetrahedron `(a, b, c, d)`; positive when
/// `(b − a, c − a, d − a)` is right-handed.
pub fn signed_volume(c: &[[f64; 3]; 4]) -> f64 {
    let a = v3(&c[0]);
    (v3(&c[1]) - a).dot(&(v3(&c[2]) - a).cross(&(v3(&c[3]) - a))) / 6.0
}

/// Radius of the sphere through the four corners.
pub fn circumsphere_radius(corners: &[[f64; 3]; 4]) -> Result<f64> {
    let vol = signed_volume(corners);
    if !(vol.abs() > EPS_VOLUME) {
        return Err(Error::Geometry(alloc::format!(
            "degenerate tetrahedron (volume {vol:e})"
        )));
    }
    let a = v3(&corners[0]);
    let u = v3(&corners[1]) - a;
    let v = v3(&corners[2]) - a;
    let w = v3(&corners[3]) - a;
    let num = v.cross(&w) * u.norm_squared()
        + w.cross(&u) * v.norm_squared()
        + u.cross(&v) * w.norm_squared();
    // u·(v×w) = 6·vol
    Ok((num / (12.0 * vol)).norm())
}

/// Volume of a ten-node element through its isoparametric map (4-point rule).
pub fn tet10_volume(nodes: &[[f64; 3]; 10]) -> f64 {
    let rule = quadrature_tet4pt();
    let mut vol = 0.0;
    for (xi, w) in rule.points.iter().zip(rule.weights) {
        let s = shape_tet10(*xi);
        let mut j = nalgebra::Matrix3::zeros();
        for (x, g) in nodes.iter().zip(&s.gradients) {
            j += v3(x) * v3(g).transpose();
        }
        vol += j.determinant() * w;
    }
    vol
}
