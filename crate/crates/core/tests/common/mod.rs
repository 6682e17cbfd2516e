#![allow(dead_code)]

use camtrack::geometry::{camera_to_world, rodriguez_to_matrix};
use camtrack::{CameraParameters, CameraPoint, Intrinsics, RodriguezParams, WorldPoint};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

/// Rotation with angle in `[0, max_angle)` about a uniform random axis.
pub fn rotation(rng: &mut ChaCha8Rng, max_angle: f64) -> Matrix3<f64> {
    let angle = rng.random_range(0.0..max_angle);
    rodriguez_to_matrix(&RodriguezParams::from_axis_angle(&unit_vector(rng), angle))
}

/// Camera with arbitrary pose, negative focal terms and small skew.
pub fn camera(rng: &mut ChaCha8Rng) -> CameraParameters {
    let alpha: f64 = -rng.random_range(500.0..2000.0);
    let beta = alpha * rng.random_range(0.9..1.1);
    let gamma = rng.random_range(-0.01..0.01) * alpha.abs();
    let intrinsics = Intrinsics::new(alpha, beta, gamma, rng.random_range(300.0..900.0), rng.random_range(200.0..600.0))
        .unwrap();
    let angle_axis = unit_vector(rng) * rng.random_range(0.0..3.0);
    CameraParameters {
        intrinsics,
        g: RodriguezParams::from_axis_angle(&angle_axis.normalize(), angle_axis.norm()),
        r_cam_bar: Vector3::new(
            rng.random_range(-500.0..500.0),
            rng.random_range(-500.0..500.0),
            rng.random_range(-3000.0..3000.0),
        ),
    }
}

/// World point in front of `cam` inside a ±45° cone around the optical axis.
pub fn visible_point(rng: &mut ChaCha8Rng, cam: &CameraParameters) -> WorldPoint {
    let uz = rng.random_range(100.0..3000.0);
    let u = CameraPoint::new(
        rng.random_range(-0.5..0.5) * uz,
        rng.random_range(-0.5..0.5) * uz,
        uz,
    );
    camera_to_world(&cam.extrinsics().unwrap(), &u)
}

/// Per-parameter relative error with a floor for parameters that can be
/// exactly zero: intrinsics are measured against the focal scale, `g`
/// against `max(1, |g|)`, `r̄_cam` against its norm.
pub fn relative_errors(truth: &CameraParameters, est: &CameraParameters) -> [f64; 11] {
    let t = truth.to_vector();
    let e = est.to_vector();
    let focal = t[0].abs().max(t[1].abs());
    let g = truth.g.0.norm().max(1.0);
    let r = truth.r_cam_bar.norm();
    let mut out = [0.0; 11];
    for k in 0..11 {
        let floor = match k {
            0..=4 => focal,
            5..=7 => g,
            _ => r,
        };
        out[k] = (t[k] - e[k]).abs() / t[k].abs().max(floor);
    }
    out
}

pub fn max_relative_error(truth: &CameraParameters, est: &CameraParameters) -> f64 {
    relative_errors(truth, est).iter().cloned().fold(0.0, f64::max)
}

/// `‖a/‖a‖ ∓ b/‖b‖‖` with the sign that minimizes it.
pub fn proportional_deviation(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x / na + y / nb).powi(2)).sum();
    plus.min(minus).sqrt()
}
