use nalgebra::{Matrix3, Vector3};

use super::{CalibrationError, Homography, PlaneLabel};
use crate::geometry::{matrix_to_rodriguez, Extrinsics, Intrinsics, RodriguezParams};
use crate::numerics::svd3;

/// Nearest rotation in the Frobenius sense: `U Vᵀ` from `A = U S Vᵀ`, with
/// the column of `U` paired with the smallest singular value negated when
/// needed to make the determinant +1.
pub fn orthonormalize(a: &Matrix3<f64>) -> Result<Matrix3<f64>, CalibrationError> {
    let scale = a.amax();
    if !(scale > 0.0) || a.determinant().abs() <= 1e-12 * scale.powi(3) {
        return Err(CalibrationError::SingularInput);
    }
    let svd = svd3(a)?;
    let mut u = svd.u;
    if (u * svd.v.transpose()).determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    Ok(u * svd.v.transpose())
}

/// Pose recovered from a single plane's homography.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneExtrinsics {
    pub plane: PlaneLabel,
    pub extrinsics: Extrinsics,
    /// Scale estimates `1/‖M_int⁻¹ h_1‖` and `1/‖M_int⁻¹ h_2‖`.
    pub e1: f64,
    pub e2: f64,
}

/// Camera pose from a plane homography and known intrinsics.
///
/// The two homography columns give two world axes in the camera frame, the
/// third axis is their cross product in right-handed order, and the third
/// column scaled by the mean of `e1` and `e2` gives `-r̄_cam`. The assembled
/// `A_camᵀ` is projected onto the rotations with [`orthonormalize`].
pub fn extrinsics_from_homography(
    h: &Homography,
    intrinsics: &Intrinsics,
) -> Result<PlaneExtrinsics, CalibrationError> {
    if intrinsics.validate().is_err() {
        return Err(CalibrationError::SingularIntrinsics);
    }
    let minv = intrinsics.inverse_matrix();
    let m = &h.matrix;
    let a = minv * m.column(0);
    let b = minv * m.column(1);
    let t = minv * m.column(2);
    let (na, nb) = (a.norm(), b.norm());
    if !(na > 0.0 && nb > 0.0) {
        return Err(CalibrationError::SingularInput);
    }
    let e1 = 1.0 / na;
    let e2 = 1.0 / nb;
    // points on the plane must have positive scale factor c
    let sign = if h.scale_at(&h.centroid) < 0.0 { -1.0 } else { 1.0 };
    let col1 = a * (sign * e1);
    let col2 = b * (sign * e2);

    let (i, j, k) = match h.plane {
        PlaneLabel::XY => (col1, col2, col1.cross(&col2)),
        PlaneLabel::XZ => (col1, col2.cross(&col1), col2),
        PlaneLabel::YZ => (col1.cross(&col2), col1, col2),
    };
    let a_cam_t = orthonormalize(&Matrix3::from_columns(&[i, j, k]))?;
    let r_cam_bar: Vector3<f64> = -t * (sign * (e1 + e2) / 2.0);

    Ok(PlaneExtrinsics {
        plane: h.plane,
        extrinsics: Extrinsics::new(a_cam_t.transpose(), r_cam_bar)?,
        e1,
        e2,
    })
}

/// Arithmetic means of the three Rodriguez vectors and the three camera
/// positions.
pub fn unify_extrinsics(
    xy: &Extrinsics,
    xz: &Extrinsics,
    yz: &Extrinsics,
) -> Result<(RodriguezParams, Vector3<f64>), CalibrationError> {
    let mut g = Vector3::zeros();
    let mut r = Vector3::zeros();
    for e in [xy, xz, yz] {
        g += matrix_to_rodriguez(e.rotation())?.0;
        r += e.r_cam_bar();
    }
    Ok((RodriguezParams(g / 3.0), r / 3.0))
}
