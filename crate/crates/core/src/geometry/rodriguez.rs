use nalgebra::{Matrix3, Vector3};

use super::camera::check_rotation;
use super::{skew, GeometryError};

/// Largest rotation angle accepted when converting a matrix back to
/// Rodriguez parameters.
pub const MAX_ROTATION_ANGLE: f64 = std::f64::consts::PI - 1e-6;

/// Rodriguez (Gibbs) parameters `g = tan(angle / 2) * axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RodriguezParams(pub Vector3<f64>);

impl RodriguezParams {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Self {
        Self(Vector3::new(g1, g2, g3))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        Self(axis.normalize() * (angle / 2.0).tan())
    }

    /// Rotation angle in radians, in `[0, pi)`.
    pub fn angle(&self) -> f64 {
        2.0 * self.0.norm().atan()
    }
}

/// `A = I + 2 / (1 + gᵀg) * (g̃ + g̃ g̃)`
pub fn rodriguez_to_matrix(g: &RodriguezParams) -> Matrix3<f64> {
    let gt = skew(&g.0);
    Matrix3::identity() + (gt + gt * gt) * (2.0 / (1.0 + g.0.norm_squared()))
}

/// Inverse of [`rodriguez_to_matrix`]:
/// `g = (A32 - A23, A13 - A31, A21 - A12) / (1 + trace A)`.
pub fn matrix_to_rodriguez(a: &Matrix3<f64>) -> Result<RodriguezParams, GeometryError> {
    check_rotation(a)?;
    let cos_angle = ((a.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    if angle > MAX_ROTATION_ANGLE {
        return Err(GeometryError::NearPiRotation(angle));
    }
    let denom = 1.0 + a.trace();
    Ok(RodriguezParams(Vector3::new(
        (a[(2, 1)] - a[(1, 2)]) / denom,
        (a[(0, 2)] - a[(2, 0)]) / denom,
        (a[(1, 0)] - a[(0, 1)]) / denom,
    )))
}
