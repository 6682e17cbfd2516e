//! Data-parallel drivers over many points, frames or scenes.
//!
//! Every function takes an [`Execution`] mode. Results are returned in input
//! order and are identical for both modes; only scheduling differs. Without
//! the `parallel` feature `Execution::Parallel` runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::calibration::{calibrate_with, CalibrateOptions, Calibration, CalibrationError, CalibrationPoint, CameraParameters};
use crate::geometry::{GeometryError, PixelPoint, WorldPoint};
use crate::synth::{SynthError, SyntheticScene};
use crate::tracking::{track_plane, track_stereo, CalibratedCamera, PlaneConstraint, StereoSolution, TrackingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually runs on the thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

fn map_ordered<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn project_many(
    exec: Execution,
    params: &CameraParameters,
    points: &[WorldPoint],
) -> Result<Vec<Result<PixelPoint, GeometryError>>, GeometryError> {
    let pm = params.projection_matrix()?;
    Ok(map_ordered(exec, points, |p| pm.project(p).map(|pr| pr.pixel)))
}

pub fn track_plane_many(
    exec: Execution,
    cam: &CalibratedCamera,
    plane: &PlaneConstraint,
    pixels: &[PixelPoint],
) -> Vec<Result<WorldPoint, TrackingError>> {
    map_ordered(exec, pixels, |n| track_plane(cam, plane, n))
}

pub fn track_stereo_many(
    exec: Execution,
    cam1: &CalibratedCamera,
    cam2: &CalibratedCamera,
    pairs: &[(PixelPoint, PixelPoint)],
) -> Vec<Result<StereoSolution, TrackingError>> {
    map_ordered(exec, pairs, |(n1, n2)| track_stereo(cam1, cam2, n1, n2))
}

pub fn calibrate_many(
    exec: Execution,
    scenes: &[Vec<CalibrationPoint>],
    options: &CalibrateOptions,
) -> Vec<Result<Calibration, CalibrationError>> {
    map_ordered(exec, scenes, |pts| calibrate_with(pts, options))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StudyError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

/// Outcome of calibrating one noisy synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrial {
    pub seed: u64,
    pub initial_error: f64,
    pub final_error: f64,
    /// Pixel distance between estimated and true principal point.
    pub principal_point_error: f64,
    pub parameters: CameraParameters,
}

/// Settings of a Monte Carlo noise study.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStudy {
    pub truth: CameraParameters,
    pub spacing: f64,
    pub per_plane: usize,
    pub noise_sigma: f64,
    pub options: CalibrateOptions,
}

impl NoiseStudy {
    pub fn run_trial(&self, seed: u64) -> Result<NoiseTrial, StudyError> {
        let scene = SyntheticScene::generate(self.truth, self.spacing, self.per_plane, self.noise_sigma, seed)?;
        let cal = calibrate_with(&scene.points, &self.options)?;
        let (est, truth) = (&cal.parameters.intrinsics, &self.truth.intrinsics);
        Ok(NoiseTrial {
            seed,
            initial_error: cal.report.initial_error,
            final_error: cal.report.final_error,
            principal_point_error: (est.n0x - truth.n0x).hypot(est.n0y - truth.n0y),
            parameters: cal.parameters,
        })
    }

    pub fn run(&self, exec: Execution, seeds: &[u64]) -> Vec<Result<NoiseTrial, StudyError>> {
        map_ordered(exec, seeds, |&seed| self.run_trial(seed))
    }
}
