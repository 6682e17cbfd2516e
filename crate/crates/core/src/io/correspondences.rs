use std::path::Path;

use super::{read_file, write_file, IoError};
use crate::calibration::{CalibrationPoint, PlaneLabel};
use crate::geometry::{PixelPoint, WorldPoint};

pub const CSV_VERSION_LINE: &str = "# camtrack-csv-v1";
pub const CSV_HEADER: [&str; 6] = ["plane", "nx", "ny", "rx", "ry", "rz"];

/// Parses correspondence CSV text. Line numbers in errors are 1-based and
/// count the version line.
pub fn parse_correspondences(text: &str) -> Result<Vec<CalibrationPoint>, IoError> {
    let first = text.lines().next().unwrap_or("");
    if first.trim_end() != CSV_VERSION_LINE {
        return Err(IoError::ParseError {
            line: 1,
            message: format!("expected version line `{CSV_VERSION_LINE}`"),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| IoError::ParseError {
        line: 2,
        message: e.to_string(),
    })?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(IoError::ParseError {
            line: 2,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let plane: PlaneLabel = record[0].parse().map_err(|e: crate::calibration::CalibrationError| IoError::ParseError {
            line,
            message: e.to_string(),
        })?;
        let mut v = [0.0; 5];
        for (k, slot) in v.iter_mut().enumerate() {
            let field = &record[k + 1];
            *slot = field.parse().map_err(|_| IoError::ParseError {
                line,
                message: format!("`{}` is not a number: `{field}`", CSV_HEADER[k + 1]),
            })?;
        }
        let point = CalibrationPoint::new(
            PixelPoint::new(v[0], v[1]),
            WorldPoint::new(v[2], v[3], v[4]),
            plane,
        )
        .map_err(|e| IoError::ValidationError {
            line,
            reason: e.to_string(),
        })?;
        points.push(point);
    }
    Ok(points)
}

/// Canonical CSV text: version line, header, one row per point with numbers
/// in shortest round-trip form, LF endings.
pub fn format_correspondences(points: &[CalibrationPoint]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\n{}\n", CSV_HEADER.join(","));
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.plane, p.image.nx, p.image.ny, p.world.rx, p.world.ry, p.world.rz
        ));
    }
    out
}

pub fn load_correspondences(path: impl AsRef<Path>) -> Result<Vec<CalibrationPoint>, IoError> {
    parse_correspondences(&read_file(path.as_ref())?)
}

pub fn save_correspondences(path: impl AsRef<Path>, points: &[CalibrationPoint]) -> Result<(), IoError> {
    write_file(path.as_ref(), &format_correspondences(points))
}
