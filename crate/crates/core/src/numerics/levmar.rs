use nalgebra::{DMatrix, DVector};

use super::{lstsq, NumericsError};

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the sum of squares by less than this
    /// fraction.
    pub rel_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LeastSquaresOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            rel_tolerance: 1e-10,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LeastSquaresMinimum {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_DAMPING: f64 = 1e16;

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg-Marquardt on `min ‖r(x)‖²` with a central-difference Jacobian.
///
/// `residuals` returns `None` where the model is undefined; such trial points
/// are rejected like an uphill step. The damped step is found as the
/// least-squares solution of `[J; sqrt(μ D)] δ = [-r; 0]` with
/// `D = diag(JᵀJ)`, which avoids forming the normal equations. The returned
/// value never exceeds the value at `x0`.
pub fn least_squares<F>(
    mut residuals: F,
    x0: &[f64],
    options: &LeastSquaresOptions,
) -> Result<LeastSquaresMinimum, NumericsError>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    if n == 0 {
        return Err(NumericsError::Dimension("empty parameter vector".into()));
    }
    let mut x = x0.to_vec();
    let mut r = residuals(&x).ok_or(NumericsError::NonFiniteObjective)?;
    let mut value = sum_sq(&r);
    if !value.is_finite() {
        return Err(NumericsError::NonFiniteObjective);
    }
    let m = r.len();
    let mut mu = options.initial_damping;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        if value == 0.0 {
            return Ok(LeastSquaresMinimum { x, value, iterations, converged: true });
        }
        iterations += 1;

        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = f64::EPSILON.cbrt() * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (Some(rp), Some(rm)) = (residuals(&xp), residuals(&xm)) else {
                return Ok(LeastSquaresMinimum { x, value, iterations, converged: false });
            };
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let diag: Vec<f64> = (0..n).map(|j| jac.column(j).norm_squared().max(1e-300)).collect();
        let mut rhs = DVector::<f64>::zeros(m + n);
        for i in 0..m {
            rhs[i] = -r[i];
        }

        let mut accepted = false;
        while mu <= MAX_DAMPING {
            let mut aug = DMatrix::<f64>::zeros(m + n, n);
            aug.view_mut((0, 0), (m, n)).copy_from(&jac);
            for j in 0..n {
                aug[(m + j, j)] = (mu * diag[j]).sqrt();
            }
            let step = match lstsq(&aug, &rhs) {
                Ok(s) => s,
                Err(NumericsError::RankDeficient { .. }) => {
                    mu *= 10.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            let trial_r = residuals(&trial);
            let trial_value = trial_r.as_deref().map(sum_sq).unwrap_or(f64::INFINITY);
            if trial_value < value {
                let decrease = value - trial_value;
                x = trial;
                r = trial_r.expect("finite trial value has residuals");
                let old = value;
                value = trial_value;
                mu = (mu / 10.0).max(1e-15);
                accepted = true;
                if decrease <= options.rel_tolerance * old {
                    return Ok(LeastSquaresMinimum { x, value, iterations, converged: true });
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: a minimum to working precision
            return Ok(LeastSquaresMinimum { x, value, iterations, converged: true });
        }
    }
    Ok(LeastSquaresMinimum { x, value, iterations, converged: false })
}
