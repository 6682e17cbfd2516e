//! Pinhole camera calibration from a trihedral chessboard pattern and
//! world-frame point tracking from calibrated cameras.
//!
//! The pipeline works in four steps: one homography per calibration plane,
//! intrinsics from the image of the absolute conic, per-plane extrinsics
//! unified through Rodriguez (Gibbs) parameters, and a refinement of the 11
//! camera parameters against reprojection error (simplex search, then a
//! least-squares polish).
//!
//! Conventions used throughout:
//! - world coordinates and camera positions are in millimeters,
//! - intrinsics are in pixels with negative focal terms (`alpha`, `beta`),
//! - `A_cam` maps camera-frame components to world-frame components,
//!   `r = r_cam + A_cam * u`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod calibration;
pub mod dataset;
pub mod geometry;
pub mod io;
pub mod numerics;
pub mod synth;
pub mod tracking;

pub use calibration::{
    calibrate, calibrate_with, CalibrateOptions, Calibration, CalibrationError,
    CalibrationPoint, CalibrationReport, CameraParameters, Homography, PlaneLabel,
};
pub use geometry::{
    CameraPoint, Extrinsics, GeometryError, Intrinsics, PixelPoint, RodriguezParams, WorldPoint,
};
pub use tracking::{CalibratedCamera, PlaneConstraint, SurfaceConstraint, TrackingError};
