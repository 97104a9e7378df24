//! `G(2,2) = S² x S²`: splitting an oriented 2-plane of `R⁴` into the
//! self-dual and anti-self-dual parts of its unit 2-vector.

use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use super::FramePair;
use crate::linalg;
use crate::{Error, Result};

pub type UnitVector3 = [f64; 3];

fn plucker(c: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    c[(0, a)] * c[(1, b)] - c[(0, b)] * c[(1, a)]
}

fn normalized(v: [f64; 3]) -> UnitVector3 {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    [v[0] / norm, v[1] / norm, v[2] / norm]
}

/// Split of a 2-frame given in an orthonormal basis of `R⁴`.
///
/// Self-dual basis `(e13 - e24, e14 + e23, e12 + e34)/√2` and anti-self-dual
/// basis `(e13 + e24, e14 - e23, e12 - e34)/√2`; the reference plane `e12`
/// maps to the north pole `(0, 0, 1)` of both spheres.
fn split_coordinates(c: &DMatrix<f64>) -> (UnitVector3, UnitVector3) {
    let e12 = plucker(c, 0, 1);
    let e13 = plucker(c, 0, 2);
    let e14 = plucker(c, 0, 3);
    let e23 = plucker(c, 1, 2);
    let e24 = plucker(c, 1, 3);
    let e34 = plucker(c, 2, 3);
    let s = FRAC_1_SQRT_2;
    let sd = [s * (e13 - e24), s * (e14 + e23), s * (e12 + e34)];
    let asd = [s * (e13 + e24), s * (e14 - e23), s * (e12 - e34)];
    (normalized(sd), normalized(asd))
}

/// Self-dual and anti-self-dual unit vectors of the plane `fp.p_frame()`,
/// expressed in the basis adapted to `fp.p0_frame()`.
pub fn s2xs2_split(fp: &FramePair) -> Result<(UnitVector3, UnitVector3)> {
    if fp.n() != 2 || fp.m() != 2 {
        return Err(Error::Dimension("the S² x S² split needs n = m = 2".into()));
    }
    Ok(split_coordinates(&fp.adapted_coordinates()))
}

/// Partial Gauss maps `(γ₁, γ₂)` of a graph tangent plane with chart
/// coordinates `z` (2 x 2).
pub fn partial_gauss_maps(z: &DMatrix<f64>) -> Result<(UnitVector3, UnitVector3)> {
    if z.shape() != (2, 2) {
        return Err(Error::Dimension("partial Gauss maps need a 2 x 2 Jacobian".into()));
    }
    let mut rows = DMatrix::zeros(2, 4);
    rows.view_mut((0, 0), (2, 2)).fill_with_identity();
    rows.view_mut((0, 2), (2, 2)).copy_from(z);
    let frame = linalg::orthonormalize_rows(&rows).expect("[I | Z] has full rank");
    Ok(split_coordinates(&frame))
}
