use nalgebra::{DMatrix, Matrix3};

use super::homography::null_vector;
use super::{CalibrationError, Homography};
use crate::geometry::Intrinsics;

/// Independent entries of the symmetric matrix `B = M_int⁻ᵀ M_int⁻¹`, packed
/// as `(B11, B12, B22, B13, B23, B33)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BVector(pub [f64; 6]);

impl BVector {
    pub fn from_matrix(b: &Matrix3<f64>) -> Self {
        Self([b[(0, 0)], b[(0, 1)], b[(1, 1)], b[(0, 2)], b[(1, 2)], b[(2, 2)]])
    }

    /// `B` computed numerically from its definition.
    pub fn from_intrinsics(i: &Intrinsics) -> Self {
        let inv = i.inverse_matrix();
        Self::from_matrix(&(inv.transpose() * inv))
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [b11, b12, b22, b13, b23, b33] = self.0;
        Matrix3::new(b11, b12, b13, b12, b22, b23, b13, b23, b33)
    }
}

/// Row vector `v_ij` with `v_ij · B̂ = h_iᵀ B h_j`, where `h_i` is column `i`
/// (1-based) of `h`.
pub fn build_v(h: &Matrix3<f64>, i: usize, j: usize) -> [f64; 6] {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j), "column index out of range");
    let hi = h.column(i - 1);
    let hj = h.column(j - 1);
    [
        hi[0] * hj[0],
        hi[0] * hj[1] + hi[1] * hj[0],
        hi[1] * hj[1],
        hi[2] * hj[0] + hi[0] * hj[2],
        hi[2] * hj[1] + hi[1] * hj[2],
        hi[2] * hj[2],
    ]
}

/// Stacks `[v12; v11 - v22]` for the three planes into the 6×6 matrix `V` and
/// returns the null vector of `VᵀV`, signed so that `B11 > 0`. Each
/// homography is scaled to unit Frobenius norm first so that its two rows
/// carry equal weight whatever scale it was estimated at.
pub fn solve_b(
    h_xy: &Homography,
    h_xz: &Homography,
    h_yz: &Homography,
) -> Result<BVector, CalibrationError> {
    let planes = [h_xy.plane, h_xz.plane, h_yz.plane];
    if planes[0] == planes[1] || planes[0] == planes[2] || planes[1] == planes[2] {
        return Err(CalibrationError::RepeatedPlane);
    }
    let mut v = DMatrix::<f64>::zeros(6, 6);
    for (k, h) in [h_xy, h_xz, h_yz].into_iter().enumerate() {
        let norm = h.matrix.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(CalibrationError::SingularInput);
        }
        let m = h.matrix / norm;
        let v12 = build_v(&m, 1, 2);
        let v11 = build_v(&m, 1, 1);
        let v22 = build_v(&m, 2, 2);
        for c in 0..6 {
            v[(2 * k, c)] = v12[c];
            v[(2 * k + 1, c)] = v11[c] - v22[c];
        }
    }
    let b = null_vector(&(v.transpose() * &v), "B from three homographies")?;
    let sign = if b[0] < 0.0 { -1.0 } else { 1.0 };
    let mut out = [0.0; 6];
    for (o, x) in out.iter_mut().zip(b.iter()) {
        *o = sign * x;
    }
    Ok(BVector(out))
}

/// Closed-form intrinsics from `B` (known up to a positive scale `lambda`).
/// Focal terms come out negative.
pub fn intrinsics_from_b(b: &BVector) -> Result<Intrinsics, CalibrationError> {
    let [b11, b12, b22, b13, b23, b33] = b.0;
    if !b.0.iter().all(|v| v.is_finite()) {
        return Err(CalibrationError::InconsistentB("non-finite entry".into()));
    }
    if !(b11 > 0.0) {
        return Err(CalibrationError::InconsistentB(format!("B11 = {b11:e} is not positive")));
    }
    let det2 = b11 * b22 - b12 * b12;
    if !(det2 > 0.0) {
        return Err(CalibrationError::InconsistentB(format!(
            "B11*B22 - B12^2 = {det2:e} is not positive"
        )));
    }
    let n0y = (b12 * b13 - b11 * b23) / det2;
    let lambda = b33 - (b13 * b13 + n0y * (b12 * b13 - b11 * b23)) / b11;
    if !(lambda / b11 > 0.0) {
        return Err(CalibrationError::InconsistentB(format!(
            "lambda/B11 = {:e} is not positive",
            lambda / b11
        )));
    }
    let alpha = -(lambda / b11).sqrt();
    let beta = -(lambda * b11 / det2).sqrt();
    let gamma = -b12 * alpha * alpha * beta / lambda;
    let n0x = gamma * n0y / beta - b13 * alpha * alpha / lambda;
    Ok(Intrinsics::new(alpha, beta, gamma, n0x, n0y)?)
}
