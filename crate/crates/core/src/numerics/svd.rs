use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{sym_eig, NumericsError};

/// `M = U * diag(S) * Vᵀ` with singular values in descending order.
#[derive(Debug, Clone, Copy)]
pub struct Svd3Result {
    pub u: Matrix3<f64>,
    pub s: Vector3<f64>,
    pub v: Matrix3<f64>,
}

impl Svd3Result {
    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.u * Matrix3::from_diagonal(&self.s) * self.v.transpose()
    }
}

/// 3×3 singular value decomposition through the eigen-decomposition of `MᵀM`.
///
/// Right singular vectors come from Jacobi on `MᵀM`. The left vectors are the
/// images `M v_i`, re-orthogonalized (Gram-Schmidt, then a cross product for
/// the third), so `U` stays orthogonal even when `M` is rank deficient.
pub fn svd3(m: &Matrix3<f64>) -> Result<Svd3Result, NumericsError> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let mtm = m.transpose() * m;
    let eig = sym_eig(&DMatrix::from_iterator(3, 3, mtm.iter().copied()))?;

    // descending order
    let mut v = Matrix3::<f64>::zeros();
    for k in 0..3 {
        for r in 0..3 {
            v[(r, k)] = eig.eigenvectors[(r, 2 - k)];
        }
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
    }

    let w = m * v;
    let w1: Vector3<f64> = w.column(0).into();
    let w2: Vector3<f64> = w.column(1).into();
    let w3: Vector3<f64> = w.column(2).into();

    let s1 = w1.norm();
    if s1 == 0.0 {
        return Ok(Svd3Result {
            u: Matrix3::identity(),
            s: Vector3::zeros(),
            v: Matrix3::identity(),
        });
    }
    let u1 = w1 / s1;

    let mut u2 = w2 - u1 * u1.dot(&w2);
    let n2 = u2.norm();
    if n2 <= f64::EPSILON * s1 {
        u2 = any_orthogonal(&u1);
    } else {
        u2 /= n2;
    }
    let s2 = w2.dot(&u2).max(0.0);

    let mut u3 = u1.cross(&u2);
    let mut s3 = w3.dot(&u3);
    if s3 < 0.0 {
        u3 = -u3;
        s3 = -s3;
    }

    let mut u = Matrix3::from_columns(&[u1, u2, u3]);
    let mut s = Vector3::new(s1, s2, s3);
    // round-off can leave nearly equal values out of order
    for i in 0..2 {
        for j in 0..(2 - i) {
            if s[j] < s[j + 1] {
                s.swap_rows(j, j + 1);
                u.swap_columns(j, j + 1);
                v.swap_columns(j, j + 1);
            }
        }
    }
    Ok(Svd3Result { u, s, v })
}

fn any_orthogonal(a: &Vector3<f64>) -> Vector3<f64> {
    let axis = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vector3::x()
    } else if a.y.abs() <= a.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    a.cross(&axis).normalize()
}
