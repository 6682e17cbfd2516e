use nalgebra::{DMatrix, DVector};

use super::{check_finite, MatrixNM, NumericsError};

const MAX_SWEEPS: usize = 64;
const RANK_TOL: f64 = 1e-12;

/// One-sided (Hestenes) Jacobi: rotates column pairs of `A` until they are
/// mutually orthogonal. Returns `W = A V` and the accumulated rotation `V`;
/// the singular values are the column norms of `W`.
fn one_sided_jacobi(a: &MatrixNM) -> Result<(DMatrix<f64>, DMatrix<f64>), NumericsError> {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..w.nrows() {
                    let wp = w[(r, p)];
                    let wq = w[(r, q)];
                    w[(r, p)] = c * wp - s * wq;
                    w[(r, q)] = s * wp + c * wq;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = c * vp - s * vq;
                    v[(r, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(NumericsError::NoConvergence(MAX_SWEEPS))
}

/// Singular values of an arbitrary `m×n` matrix (`m ≥ n`), descending.
pub fn singular_values(a: &MatrixNM) -> Result<DVector<f64>, NumericsError> {
    check_finite(a)?;
    let (w, _) = one_sided_jacobi(a)?;
    let mut s: Vec<f64> = (0..w.ncols()).map(|j| w.column(j).norm()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(DVector::from_vec(s))
}

/// Least-squares solution of `A x ≈ b` through the pseudo-inverse of `A`.
///
/// Fails with `RankDeficient` when the smallest singular value is below
/// `1e-12` times the largest.
pub fn lstsq(a: &MatrixNM, b: &DVector<f64>) -> Result<DVector<f64>, NumericsError> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(NumericsError::Dimension(format!(
            "least squares needs rows >= cols >= 1, got {m}x{n}"
        )));
    }
    if b.len() != m {
        return Err(NumericsError::Dimension(format!(
            "right-hand side has {} entries, matrix has {m} rows",
            b.len()
        )));
    }
    check_finite(a)?;
    if !b.iter().all(|x| x.is_finite()) {
        return Err(NumericsError::NonFinite);
    }

    let (w, v) = one_sided_jacobi(a)?;
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let smin = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin < RANK_TOL * smax {
        let ratio = if smax == 0.0 { 0.0 } else { smin / smax };
        return Err(NumericsError::RankDeficient { ratio });
    }

    let mut x = DVector::<f64>::zeros(n);
    for (j, norm) in norms.iter().enumerate() {
        let coef = w.column(j).dot(b) / (norm * norm);
        x += v.column(j) * coef;
    }
    Ok(x)
}
