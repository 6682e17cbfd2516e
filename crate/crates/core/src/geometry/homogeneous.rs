use nalgebra::{Vector2, Vector3, Vector4};

use super::GeometryError;

const INFINITY_TOL: f64 = 1e-14;

/// Homogeneous representation of a 2D vector: `(a vx, a vy, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hom2(pub Vector3<f64>);

/// Homogeneous representation of a 3D vector: `(b wx, b wy, b wz, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hom3(pub Vector4<f64>);

/// Canonical representative (last component 1).
pub fn hom2(v: Vector2<f64>) -> Hom2 {
    Hom2(Vector3::new(v.x, v.y, 1.0))
}

pub fn hom3(w: Vector3<f64>) -> Hom3 {
    Hom3(Vector4::new(w.x, w.y, w.z, 1.0))
}

fn at_infinity(last: f64, max_abs: f64) -> bool {
    last.abs() <= INFINITY_TOL * max_abs
}

/// Proportionality test through all 2×2 cross products `a_i b_j - a_j b_i`.
fn proportional(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())) * b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return false;
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if (a[i] * b[j] - a[j] * b[i]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

impl Hom2 {
    pub fn dehom(&self) -> Result<Vector2<f64>, GeometryError> {
        let v = self.0;
        if at_infinity(v.z, v.amax()) {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(Vector2::new(v.x / v.z, v.y / v.z))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Hom2(self.0 * k)
    }

    /// Equivalence of homogeneous vectors: equal up to a nonzero factor.
    pub fn equivalent(&self, other: &Hom2, tol: f64) -> bool {
        proportional(self.0.as_slice(), other.0.as_slice(), tol)
    }
}

impl Hom3 {
    pub fn dehom(&self) -> Result<Vector3<f64>, GeometryError> {
        let v = self.0;
        if at_infinity(v.w, v.amax()) {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(Vector3::new(v.x / v.w, v.y / v.w, v.z / v.w))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Hom3(self.0 * k)
    }

    pub fn equivalent(&self, other: &Hom3, tol: f64) -> bool {
        proportional(self.0.as_slice(), other.0.as_slice(), tol)
    }
}
