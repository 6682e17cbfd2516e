use serde::{Deserialize, Serialize};

use super::{CalibrationError, CalibrationPoint, CameraParameters};
use crate::numerics::{least_squares, minimize, LeastSquaresOptions, MinimizeOptions};

/// Outcome of the refinement step. Errors are in pixels².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationReport {
    pub initial_error: f64,
    pub final_error: f64,
    /// `sqrt(final_error / n)` in pixels.
    pub rms_reprojection: f64,
    /// Pixel distance between measured and reprojected position, per point,
    /// in input order.
    pub per_point_errors: Vec<f64>,
    /// Simplex iterations plus least-squares polish iterations.
    pub iterations: usize,
}

impl CalibrationReport {
    /// Report for parameters that were not refined.
    pub fn unrefined(p: &CameraParameters, points: &[CalibrationPoint]) -> Result<Self, CalibrationError> {
        let (e, per_point) = reprojection_error(p, points)?;
        Ok(Self {
            initial_error: e,
            final_error: e,
            rms_reprojection: (e / points.len() as f64).sqrt(),
            per_point_errors: per_point,
            iterations: 0,
        })
    }

    pub fn max_error(&self) -> f64 {
        self.per_point_errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Sum of squared reprojection distances and the per-point distances.
///
/// The squared terms are accumulated in ascending order so the total does not
/// depend on the order of `points`.
pub fn reprojection_error(
    p: &CameraParameters,
    points: &[CalibrationPoint],
) -> Result<(f64, Vec<f64>), CalibrationError> {
    if points.is_empty() {
        return Err(CalibrationError::NoPoints);
    }
    let pm = p.projection_matrix()?;
    let mut per_point = Vec::with_capacity(points.len());
    for (index, pt) in points.iter().enumerate() {
        let proj = pm.project(&pt.world).map_err(|_| {
            let h = pm.0 * nalgebra::Vector4::new(pt.world.rx, pt.world.ry, pt.world.rz, 1.0);
            CalibrationError::DegenerateProjection { index, scale: h.z }
        })?;
        per_point.push(pt.image.distance(proj.pixel));
    }
    let mut squares: Vec<f64> = per_point.iter().map(|e| e * e).collect();
    squares.sort_by(f64::total_cmp);
    Ok((squares.iter().sum(), per_point))
}

/// Settings of the refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    /// Derivative-free simplex search over the 11 parameters.
    pub simplex: MinimizeOptions,
    /// Levenberg-Marquardt polish on the per-point residuals after the
    /// simplex; `None` skips it.
    pub polish: Option<LeastSquaresOptions>,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            simplex: MinimizeOptions::default(),
            polish: Some(LeastSquaresOptions::default()),
        }
    }
}

/// Reprojection residuals `(Δnx, Δny)` per point, `None` where the parameters
/// cannot project every point.
fn residual_vector(x: &[f64], points: &[CalibrationPoint]) -> Option<Vec<f64>> {
    let pm = CameraParameters::from_slice(x).projection_matrix().ok()?;
    let mut r = Vec::with_capacity(2 * points.len());
    for pt in points {
        let px = pm.project(&pt.world).ok()?.pixel;
        r.push(px.nx - pt.image.nx);
        r.push(px.ny - pt.image.ny);
    }
    r.iter().all(|v| v.is_finite()).then_some(r)
}

/// Minimizes the reprojection error over the 11 packed camera parameters,
/// starting from `p0`.
pub fn refine(
    p0: &CameraParameters,
    points: &[CalibrationPoint],
) -> Result<(CameraParameters, CalibrationReport), CalibrationError> {
    refine_with(p0, points, &RefineOptions::default())
}

/// Simplex search, then an optional least-squares polish from the simplex
/// optimum. Each stage is kept only if it lowers `E`, so the result never
/// has a larger error than `p0`.
pub fn refine_with(
    p0: &CameraParameters,
    points: &[CalibrationPoint],
    options: &RefineOptions,
) -> Result<(CameraParameters, CalibrationReport), CalibrationError> {
    let (e0, _) = reprojection_error(p0, points)?;
    // parameter vectors that cannot project every point (invalid intrinsics,
    // a point on the camera plane) are walled off with the largest finite value
    let objective = |x: &[f64]| -> f64 {
        match reprojection_error(&CameraParameters::from_slice(x), points) {
            Ok((e, _)) => e,
            Err(_) => f64::MAX,
        }
    };
    let min = minimize(objective, &p0.to_vector(), &options.simplex)?;
    let mut iterations = min.iterations;

    let mut best = *p0;
    let (mut e, mut per_point) = reprojection_error(p0, points)?;
    let candidate = CameraParameters::from_slice(&min.x);
    if let Ok((ec, pc)) = reprojection_error(&candidate, points) {
        if ec <= e {
            (best, e, per_point) = (candidate, ec, pc);
        }
    }

    if let Some(polish) = &options.polish {
        if e > 0.0 {
            let lm = least_squares(|x| residual_vector(x, points), &best.to_vector(), polish)?;
            iterations += lm.iterations;
            let candidate = CameraParameters::from_slice(&lm.x);
            if let Ok((ec, pc)) = reprojection_error(&candidate, points) {
                if ec < e {
                    (best, e, per_point) = (candidate, ec, pc);
                }
            }
        }
    }

    Ok((
        best,
        CalibrationReport {
            initial_error: e0,
            final_error: e,
            rms_reprojection: (e / points.len() as f64).sqrt(),
            per_point_errors: per_point,
            iterations,
        },
    ))
}
