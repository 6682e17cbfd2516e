//! Four-step calibration from a trihedral chessboard: per-plane homographies,
//! intrinsics from `B = M_int⁻ᵀ M_int⁻¹`, per-plane extrinsics unified in
//! Rodriguez parameters, then simplex refinement of the 11 camera parameters.

mod extrinsics;
mod homography;
mod intrinsics;
mod refine;

pub use extrinsics::{extrinsics_from_homography, orthonormalize, unify_extrinsics, PlaneExtrinsics};
pub use homography::{build_l_rows, estimate_homography, Homography, MIN_POINTS_PER_PLANE};
pub use intrinsics::{build_v, intrinsics_from_b, solve_b, BVector};
pub use refine::{refine, refine_with, reprojection_error, CalibrationReport, RefineOptions};

use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    rodriguez_to_matrix, Extrinsics, GeometryError, Intrinsics, PixelPoint, Projection,
    ProjectionMatrix, RodriguezParams, WorldPoint,
};
use crate::numerics::NumericsError;

/// One of the three coordinate planes of the trihedral pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaneLabel {
    XY,
    XZ,
    YZ,
}

impl PlaneLabel {
    pub const ALL: [PlaneLabel; 3] = [PlaneLabel::XY, PlaneLabel::XZ, PlaneLabel::YZ];

    /// Index of the world coordinate that is zero on this plane.
    pub fn zero_axis(self) -> usize {
        match self {
            PlaneLabel::XY => 2,
            PlaneLabel::XZ => 1,
            PlaneLabel::YZ => 0,
        }
    }

    /// Indices of the two in-plane world coordinates, in order.
    pub fn planar_axes(self) -> [usize; 2] {
        match self {
            PlaneLabel::XY => [0, 1],
            PlaneLabel::XZ => [0, 2],
            PlaneLabel::YZ => [1, 2],
        }
    }

    pub fn planar_coords(self, w: &WorldPoint) -> Vector2<f64> {
        let v = w.to_vector();
        let [a, b] = self.planar_axes();
        Vector2::new(v[a], v[b])
    }

    pub fn world_point(self, a: f64, b: f64) -> WorldPoint {
        let mut v = Vector3::zeros();
        let [ia, ib] = self.planar_axes();
        v[ia] = a;
        v[ib] = b;
        v.into()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlaneLabel::XY => "XY",
            PlaneLabel::XZ => "XZ",
            PlaneLabel::YZ => "YZ",
        }
    }
}

impl fmt::Display for PlaneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlaneLabel {
    type Err = CalibrationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "XY" => Ok(PlaneLabel::XY),
            "XZ" => Ok(PlaneLabel::XZ),
            "YZ" => Ok(PlaneLabel::YZ),
            other => Err(CalibrationError::InvalidPoint(format!(
                "unknown plane label {other:?}, expected XY, XZ or YZ"
            ))),
        }
    }
}

/// A measured pixel paired with its world position on one calibration plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub image: PixelPoint,
    pub world: WorldPoint,
    pub plane: PlaneLabel,
}

impl CalibrationPoint {
    pub fn new(image: PixelPoint, world: WorldPoint, plane: PlaneLabel) -> Result<Self, CalibrationError> {
        let values = [image.nx, image.ny, world.rx, world.ry, world.rz];
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CalibrationError::InvalidPoint("non-finite coordinate".into()));
        }
        let zero = world.to_vector()[plane.zero_axis()];
        if zero != 0.0 {
            let axis = ["rx", "ry", "rz"][plane.zero_axis()];
            return Err(CalibrationError::InvalidPoint(format!(
                "{axis} must be exactly 0 on plane {plane}, got {zero}"
            )));
        }
        Ok(Self { image, world, plane })
    }
}

/// The 11 camera parameters: five intrinsics, Rodriguez parameters of `A_cam`
/// and the camera position in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParameters {
    pub intrinsics: Intrinsics,
    pub g: RodriguezParams,
    pub r_cam_bar: Vector3<f64>,
}

impl CameraParameters {
    pub const LEN: usize = 11;
    pub const NAMES: [&'static str; 11] = [
        "alpha", "beta", "gamma", "n0x", "n0y", "g1", "g2", "g3", "r_cam_bar_x", "r_cam_bar_y",
        "r_cam_bar_z",
    ];

    /// Packed as `(alpha, beta, gamma, n0x, n0y, g, r̄_cam)`.
    pub fn to_vector(&self) -> [f64; 11] {
        let i = &self.intrinsics;
        [
            i.alpha,
            i.beta,
            i.gamma,
            i.n0x,
            i.n0y,
            self.g.0.x,
            self.g.0.y,
            self.g.0.z,
            self.r_cam_bar.x,
            self.r_cam_bar.y,
            self.r_cam_bar.z,
        ]
    }

    /// Inverse of [`to_vector`](Self::to_vector). No validation is done so the
    /// optimizer can probe any point.
    pub fn from_slice(p: &[f64]) -> Self {
        assert_eq!(p.len(), Self::LEN, "camera parameter vector must have 11 entries");
        Self {
            intrinsics: Intrinsics {
                alpha: p[0],
                beta: p[1],
                gamma: p[2],
                n0x: p[3],
                n0y: p[4],
            },
            g: RodriguezParams::new(p[5], p[6], p[7]),
            r_cam_bar: Vector3::new(p[8], p[9], p[10]),
        }
    }

    pub fn from_extrinsics(intrinsics: Intrinsics, e: &Extrinsics) -> Result<Self, GeometryError> {
        Ok(Self {
            intrinsics,
            g: crate::geometry::matrix_to_rodriguez(e.rotation())?,
            r_cam_bar: *e.r_cam_bar(),
        })
    }

    pub fn extrinsics(&self) -> Result<Extrinsics, GeometryError> {
        Extrinsics::new(rodriguez_to_matrix(&self.g), self.r_cam_bar)
    }

    pub fn projection_matrix(&self) -> Result<ProjectionMatrix, GeometryError> {
        self.intrinsics.validate()?;
        Ok(ProjectionMatrix::new(&self.intrinsics, &self.extrinsics()?))
    }

    pub fn project(&self, p: &WorldPoint) -> Result<Projection, GeometryError> {
        self.projection_matrix()?.project(p)
    }
}

/// The four stages of [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineStep {
    Homographies,
    Intrinsics,
    Extrinsics,
    Refinement,
}

impl fmt::Display for PipelineStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineStep::Homographies => "step 1 (homographies)",
            PipelineStep::Intrinsics => "step 2 (intrinsic parameters)",
            PipelineStep::Extrinsics => "step 3 (extrinsic parameters)",
            PipelineStep::Refinement => "step 4 (refinement)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("invalid calibration point: {0}")]
    InvalidPoint(String),
    #[error("insufficient points (need at least {required} per plane): {}", format_shortfalls(.shortfalls))]
    InsufficientPoints {
        required: usize,
        shortfalls: Vec<(PlaneLabel, usize)>,
    },
    #[error("duplicate calibration points on plane {0}")]
    DuplicatePoints(PlaneLabel),
    #[error("degenerate configuration in {context}: two smallest eigenvalues {smallest:e} and {second:e} are not separated")]
    DegenerateConfiguration {
        context: String,
        smallest: f64,
        second: f64,
    },
    #[error("inconsistent B estimate: {0}")]
    InconsistentB(String),
    #[error("matrix is singular and cannot be orthonormalized")]
    SingularInput,
    #[error("intrinsic matrix is singular")]
    SingularIntrinsics,
    #[error("homographies must come from three distinct planes")]
    RepeatedPlane,
    #[error("point {index} projects degenerately (scale factor {scale:e})")]
    DegenerateProjection { index: usize, scale: f64 },
    #[error("empty calibration point list")]
    NoPoints,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("{step} failed: {source}")]
    Step {
        step: PipelineStep,
        source: Box<CalibrationError>,
    },
}

fn format_shortfalls(s: &[(PlaneLabel, usize)]) -> String {
    s.iter()
        .map(|(p, n)| format!("plane {p} has {n}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl CalibrationError {
    /// The underlying error with pipeline-step annotations removed.
    pub fn root(&self) -> &CalibrationError {
        match self {
            CalibrationError::Step { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the failure is numerical (degenerate data, no convergence)
    /// rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self.root(),
            CalibrationError::InvalidPoint(_)
                | CalibrationError::InsufficientPoints { .. }
                | CalibrationError::DuplicatePoints(_)
                | CalibrationError::RepeatedPlane
                | CalibrationError::NoPoints
        )
    }

    fn at(step: PipelineStep) -> impl FnOnce(CalibrationError) -> CalibrationError {
        move |e| CalibrationError::Step {
            step,
            source: Box::new(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateOptions {
    /// Run step 4; when false the closed-form estimate is returned.
    pub refine: bool,
    pub refinement: RefineOptions,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        Self {
            refine: true,
            refinement: RefineOptions::default(),
        }
    }
}

/// Closed-form estimate from steps 1-3.
#[derive(Debug, Clone)]
pub struct InitialEstimate {
    /// In `PlaneLabel::ALL` order.
    pub homographies: [Homography; 3],
    pub b: BVector,
    pub intrinsics: Intrinsics,
    pub plane_extrinsics: [PlaneExtrinsics; 3],
    pub parameters: CameraParameters,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub parameters: CameraParameters,
    pub report: CalibrationReport,
    pub estimate: InitialEstimate,
}

/// Checks the per-plane point counts.
pub fn check_point_counts(points: &[CalibrationPoint]) -> Result<(), CalibrationError> {
    let shortfalls: Vec<(PlaneLabel, usize)> = PlaneLabel::ALL
        .iter()
        .map(|&p| (p, points.iter().filter(|q| q.plane == p).count()))
        .filter(|&(_, n)| n < MIN_POINTS_PER_PLANE)
        .collect();
    if shortfalls.is_empty() {
        Ok(())
    } else {
        Err(CalibrationError::InsufficientPoints {
            required: MIN_POINTS_PER_PLANE,
            shortfalls,
        })
    }
}

/// Steps 1-3: homographies, intrinsics, unified extrinsics.
pub fn initial_estimate(points: &[CalibrationPoint]) -> Result<InitialEstimate, CalibrationError> {
    check_point_counts(points).map_err(CalibrationError::at(PipelineStep::Homographies))?;
    let homographies = [
        estimate_homography(points, PlaneLabel::XY),
        estimate_homography(points, PlaneLabel::XZ),
        estimate_homography(points, PlaneLabel::YZ),
    ];
    let [hxy, hxz, hyz] = homographies;
    let homographies = [hxy?, hxz?, hyz?];
    estimate_from_homographies(homographies)
}

/// Steps 2-3 from already estimated homographies (`PlaneLabel::ALL` order).
pub fn estimate_from_homographies(
    homographies: [Homography; 3],
) -> Result<InitialEstimate, CalibrationError> {
    let [hxy, hxz, hyz] = &homographies;
    let b = solve_b(hxy, hxz, hyz).map_err(CalibrationError::at(PipelineStep::Intrinsics))?;
    let intrinsics = intrinsics_from_b(&b).map_err(CalibrationError::at(PipelineStep::Intrinsics))?;

    let step3 = || -> Result<([PlaneExtrinsics; 3], CameraParameters), CalibrationError> {
        let pe = [
            extrinsics_from_homography(hxy, &intrinsics)?,
            extrinsics_from_homography(hxz, &intrinsics)?,
            extrinsics_from_homography(hyz, &intrinsics)?,
        ];
        let (g, r_cam_bar) = unify_extrinsics(&pe[0].extrinsics, &pe[1].extrinsics, &pe[2].extrinsics)?;
        Ok((
            pe,
            CameraParameters {
                intrinsics,
                g,
                r_cam_bar,
            },
        ))
    };
    let (plane_extrinsics, parameters) = step3().map_err(CalibrationError::at(PipelineStep::Extrinsics))?;

    Ok(InitialEstimate {
        homographies,
        b,
        intrinsics,
        plane_extrinsics,
        parameters,
    })
}

/// Full calibration with default options.
pub fn calibrate(points: &[CalibrationPoint]) -> Result<Calibration, CalibrationError> {
    calibrate_with(points, &CalibrateOptions::default())
}

pub fn calibrate_with(
    points: &[CalibrationPoint],
    options: &CalibrateOptions,
) -> Result<Calibration, CalibrationError> {
    let estimate = initial_estimate(points)?;
    let (parameters, report) = if options.refine {
        refine::refine_with(&estimate.parameters, points, &options.refinement)
            .map_err(CalibrationError::at(PipelineStep::Refinement))?
    } else {
        let report = CalibrationReport::unrefined(&estimate.parameters, points)
            .map_err(CalibrationError::at(PipelineStep::Refinement))?;
        (estimate.parameters, report)
    };
    Ok(Calibration {
        parameters,
        report,
        estimate,
    })
}
