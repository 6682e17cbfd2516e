//! Correspondence CSV and camera JSON files.

mod camera;
mod correspondences;

pub use camera::{
    camera_from_json, camera_to_json, load_camera, load_camera_file, save_camera, CameraFile,
    CAMERA_FORMAT_VERSION,
};
pub use correspondences::{
    format_correspondences, load_correspondences, parse_correspondences, save_correspondences,
    CSV_HEADER, CSV_VERSION_LINE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("line {line}: {reason}")]
    ValidationError { line: u64, reason: String },
    #[error("camera file: {0}")]
    SchemaError(String),
    #[error("camera file is not valid JSON: {0}")]
    JsonSyntax(String),
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}
