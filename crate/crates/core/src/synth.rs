//! Synthetic calibration scenes with a known camera, and a second projection
//! implementation used as an oracle.
//!
//! Noise is drawn from `ChaCha8Rng::seed_from_u64(seed)`, two normal samples
//! per point (x then y) in point order, so scenes are bit-stable across
//! platforms for a given seed.

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::calibration::{CalibrationPoint, CameraParameters, PlaneLabel};
use crate::geometry::{matrix_to_rodriguez, GeometryError, Intrinsics, PixelPoint, WorldPoint};
use crate::io::camera_from_json;

pub const DEFAULT_TRUTH_JSON: &str = include_str!("../fixtures/default_truth.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("points behind the camera (indices {0:?})")]
    PointBehindCamera(Vec<usize>),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("noise sigma must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// World point of the pattern with the plane it lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub world: WorldPoint,
    pub plane: PlaneLabel,
}

/// Calibration points on the three pattern planes, planes in the order
/// XY, XZ, YZ.
///
/// Planar coordinates are odd multiples of `spacing`. Per plane the diagonal
/// `(k, k)` comes first, then `(1, k)` and `(k, 1)` for `k ≥ 2`, truncated to
/// `per_plane` points. With `spacing = 25` and `per_plane = 10` this is the
/// layout of the embedded dataset.
pub fn trihedral_grid(spacing: f64, per_plane: usize) -> Result<Vec<GridPoint>, SynthError> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(SynthError::InvalidGrid(format!("spacing must be positive, got {spacing}")));
    }
    if per_plane < crate::calibration::MIN_POINTS_PER_PLANE {
        return Err(SynthError::InvalidGrid(format!(
            "at least {} points per plane are needed, got {per_plane}",
            crate::calibration::MIN_POINTS_PER_PLANE
        )));
    }
    let m = (per_plane + 2).div_ceil(3);
    let mut cells: Vec<(usize, usize)> = (1..=m).map(|k| (k, k)).collect();
    cells.extend((2..=m).map(|k| (1, k)));
    cells.extend((2..=m).map(|k| (k, 1)));
    cells.truncate(per_plane);

    let odd = |k: usize| (2 * k - 1) as f64 * spacing;
    Ok(PlaneLabel::ALL
        .iter()
        .flat_map(|&plane| {
            cells.iter().map(move |&(a, b)| GridPoint {
                world: plane.world_point(odd(a), odd(b)),
                plane,
            })
        })
        .collect())
}

/// Projects `world` through `truth` and adds isotropic Gaussian pixel noise.
pub fn render(
    truth: &CameraParameters,
    world: &[GridPoint],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<CalibrationPoint>, SynthError> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(SynthError::InvalidSigma(noise_sigma));
    }
    let pm = truth.projection_matrix()?;
    let mut behind = Vec::new();
    let mut clean = Vec::with_capacity(world.len());
    for (k, gp) in world.iter().enumerate() {
        let c = (pm.0 * gp.world.to_vector().push(1.0)).z;
        if !(c > 0.0) {
            behind.push(k);
            continue;
        }
        clean.push(pm.project(&gp.world)?.pixel);
    }
    if !behind.is_empty() {
        return Err(SynthError::PointBehindCamera(behind));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma).map_err(|_| SynthError::InvalidSigma(noise_sigma))?;
    world
        .iter()
        .zip(clean)
        .map(|(gp, pixel)| {
            let pixel = if noise_sigma > 0.0 {
                let dx = normal.sample(&mut rng);
                let dy = normal.sample(&mut rng);
                PixelPoint::new(pixel.nx + dx, pixel.ny + dy)
            } else {
                pixel
            };
            CalibrationPoint::new(pixel, gp.world, gp.plane)
                .map_err(|e| SynthError::InvalidGrid(e.to_string()))
        })
        .collect()
}

/// A rendered scene together with the camera that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub truth: CameraParameters,
    pub points: Vec<CalibrationPoint>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticScene {
    pub fn generate(
        truth: CameraParameters,
        spacing: f64,
        per_plane: usize,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<Self, SynthError> {
        let grid = trihedral_grid(spacing, per_plane)?;
        Ok(Self {
            points: render(&truth, &grid, noise_sigma, seed)?,
            truth,
            noise_sigma,
            seed,
        })
    }
}

/// The reference synthetic camera, loaded from the shipped fixture: on the
/// positive diagonal at (350, 350, 350) mm looking at the pattern origin.
pub fn default_truth() -> CameraParameters {
    camera_from_json(DEFAULT_TRUTH_JSON)
        .expect("default truth fixture is valid")
        .params
}

/// Rotation `A_cam` of a camera at `position` whose optical axis points at
/// `target`, with image "up" as close to `up` as possible.
pub fn look_at(position: &Vector3<f64>, target: &Vector3<f64>, up: &Vector3<f64>) -> Result<Matrix3<f64>, GeometryError> {
    let z = (target - position)
        .try_normalize(1e-12)
        .ok_or_else(|| GeometryError::InvalidPhysical("camera looks along the up direction or at itself".into()))?;
    let x = up.cross(&z).try_normalize(1e-12).ok_or_else(|| GeometryError::InvalidPhysical("camera looks along the up direction or at itself".into()))?;
    let y = z.cross(&x);
    Ok(Matrix3::from_columns(&[x, y, z]))
}

/// A randomized variant of the default camera (γ = 0): position, aim point,
/// roll, focal terms and principal point are perturbed deterministically
/// from `seed`.
pub fn jittered_truth(seed: u64) -> CameraParameters {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ca11_b8a7_e000);
    let mut jitter = |r: f64| rng.random_range(-r..=r);
    let position = Vector3::new(350.0 + jitter(40.0), 350.0 + jitter(40.0), 350.0 + jitter(40.0));
    let target = Vector3::new(jitter(15.0), jitter(15.0), jitter(15.0));
    let roll = jitter(0.15);
    let alpha = -1000.0 + jitter(100.0);
    let beta = alpha * (1.0 + jitter(0.02));
    let n0x = 640.0 + jitter(20.0);
    let n0y = 360.0 + jitter(20.0);

    let base = look_at(&position, &target, &Vector3::z()).expect("diagonal camera is not degenerate");
    let rotation = base * Rotation3::from_axis_angle(&Vector3::z_axis(), roll).into_inner();
    CameraParameters {
        intrinsics: Intrinsics::new(alpha, beta, 0.0, n0x, n0y).expect("valid jittered intrinsics"),
        g: matrix_to_rodriguez(&rotation).expect("rotation well below a half turn"),
        r_cam_bar: rotation.transpose() * position,
    }
}

type Quat = [f64; 4];

fn quat_mul(a: &Quat, b: &Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Projection computed step by step without matrices: the Rodriguez vector
/// becomes the unit quaternion `(1, g)/sqrt(1 + g·g)`, the world point is
/// rotated into the camera frame by the conjugate quaternion and shifted by
/// `r̄_cam`, then mapped through the intrinsics and dehomogenized.
pub fn independent_project(truth: &CameraParameters, p: &WorldPoint) -> Result<PixelPoint, GeometryError> {
    let g = truth.g.0;
    let norm = (1.0 + g.x * g.x + g.y * g.y + g.z * g.z).sqrt();
    let q: Quat = [1.0 / norm, g.x / norm, g.y / norm, g.z / norm];
    let q_conj: Quat = [q[0], -q[1], -q[2], -q[3]];

    // frame transform: u = A_cam^T r - r̄
    let r: Quat = [0.0, p.rx, p.ry, p.rz];
    let rotated = quat_mul(&quat_mul(&q_conj, &r), &q);
    let ux = rotated[1] - truth.r_cam_bar.x;
    let uy = rotated[2] - truth.r_cam_bar.y;
    let uz = rotated[3] - truth.r_cam_bar.z;

    let i = &truth.intrinsics;
    let hx = i.alpha * ux + i.gamma * uy + i.n0x * uz;
    let hy = i.beta * uy + i.n0y * uz;
    if uz.abs() <= 1e-12 {
        return Err(GeometryError::DegenerateProjection(uz));
    }
    Ok(PixelPoint::new(hx / uz, hy / uz))
}
