//! Homogeneous coordinates, the pinhole projection model and the Rodriguez
//! rotation parametrization.

mod camera;
mod homogeneous;
mod rodriguez;

pub use camera::{
    camera_to_world, project, world_to_camera, Extrinsics, Intrinsics, Projection,
    ProjectionMatrix,
};
pub use homogeneous::{hom2, hom3, Hom2, Hom3};
pub use rodriguez::{matrix_to_rodriguez, rodriguez_to_matrix, RodriguezParams};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point at infinity: last homogeneous component is zero")]
    PointAtInfinity,
    #[error("invalid physical camera parameter: {0}")]
    InvalidPhysical(String),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("rotation matrix is not orthonormal with det +1 (deviation {0:e})")]
    NotARotation(f64),
    #[error("degenerate projection: scale factor {0:e} is too close to zero")]
    DegenerateProjection(f64),
    #[error("rotation angle {0} rad is too close to pi for Rodriguez parameters")]
    NearPiRotation(f64),
}

/// Image position in pixels (sub-pixel allowed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub nx: f64,
    pub ny: f64,
}

impl PixelPoint {
    pub const fn new(nx: f64, ny: f64) -> Self {
        Self { nx, ny }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.nx, self.ny)
    }

    pub fn distance(self, other: PixelPoint) -> f64 {
        (self.nx - other.nx).hypot(self.ny - other.ny)
    }
}

impl From<Vector2<f64>> for PixelPoint {
    fn from(v: Vector2<f64>) -> Self {
        Self::new(v.x, v.y)
    }
}

/// Point components in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPoint {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
}

impl CameraPoint {
    pub const fn new(ux: f64, uy: f64, uz: f64) -> Self {
        Self { ux, uy, uz }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.ux, self.uy, self.uz)
    }
}

impl From<Vector3<f64>> for CameraPoint {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Point components in the world frame, millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl WorldPoint {
    pub const fn new(rx: f64, ry: f64, rz: f64) -> Self {
        Self { rx, ry, rz }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.rx, self.ry, self.rz)
    }
}

impl From<Vector3<f64>> for WorldPoint {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Skew-symmetric matrix such that `skew(a) * b == a × b`.
pub fn skew(a: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}
