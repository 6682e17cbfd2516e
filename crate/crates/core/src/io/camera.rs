use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{read_file, write_file, IoError};
use crate::calibration::{CalibrationReport, CameraParameters};
use crate::geometry::{Intrinsics, RodriguezParams};

pub const CAMERA_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Schema {
    format_version: u32,
    alpha: f64,
    beta: f64,
    gamma: f64,
    n0x: f64,
    n0y: f64,
    g: [f64; 3],
    r_cam_bar: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<CalibrationReport>,
}

/// Contents of a camera file.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraFile {
    pub params: CameraParameters,
    pub report: Option<CalibrationReport>,
}

/// JSON text for a camera. Floats are written in shortest round-trip form,
/// so loading gives back the identical parameters.
pub fn camera_to_json(params: &CameraParameters, report: Option<&CalibrationReport>) -> String {
    let i = &params.intrinsics;
    let schema = Schema {
        format_version: CAMERA_FORMAT_VERSION,
        alpha: i.alpha,
        beta: i.beta,
        gamma: i.gamma,
        n0x: i.n0x,
        n0y: i.n0y,
        g: params.g.0.into(),
        r_cam_bar: params.r_cam_bar.into(),
        report: report.cloned(),
    };
    let mut text = serde_json::to_string_pretty(&schema).expect("camera schema always serializes");
    text.push('\n');
    text
}

pub fn camera_from_json(text: &str) -> Result<CameraFile, IoError> {
    let schema: Schema = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => IoError::SchemaError(e.to_string()),
        _ => IoError::JsonSyntax(e.to_string()),
    })?;
    if schema.format_version != CAMERA_FORMAT_VERSION {
        return Err(IoError::SchemaError(format!(
            "unsupported format_version {} (expected {CAMERA_FORMAT_VERSION})",
            schema.format_version
        )));
    }
    let intrinsics = Intrinsics::new(schema.alpha, schema.beta, schema.gamma, schema.n0x, schema.n0y)
        .map_err(|e| IoError::SchemaError(e.to_string()))?;
    let values = schema.g.iter().chain(schema.r_cam_bar.iter());
    if !values.into_iter().all(|v| v.is_finite()) {
        return Err(IoError::SchemaError("g and r_cam_bar must be finite".into()));
    }
    Ok(CameraFile {
        params: CameraParameters {
            intrinsics,
            g: RodriguezParams(Vector3::from(schema.g)),
            r_cam_bar: Vector3::from(schema.r_cam_bar),
        },
        report: schema.report,
    })
}

pub fn save_camera(
    path: impl AsRef<Path>,
    params: &CameraParameters,
    report: Option<&CalibrationReport>,
) -> Result<(), IoError> {
    write_file(path.as_ref(), &camera_to_json(params, report))
}

pub fn load_camera_file(path: impl AsRef<Path>) -> Result<CameraFile, IoError> {
    camera_from_json(&read_file(path.as_ref())?)
}

pub fn load_camera(path: impl AsRef<Path>) -> Result<CameraParameters, IoError> {
    Ok(load_camera_file(path)?.params)
}
