//! The 30 hand-measured calibration points of the trihedral pattern
//! (10 per plane), shipped with the crate.

use crate::calibration::CalibrationPoint;
use crate::io::parse_correspondences;

/// Canonical CSV text of the dataset, identical to `fixtures/table1.csv`.
pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");

pub fn table1() -> Vec<CalibrationPoint> {
    parse_correspondences(TABLE1_CSV).expect("embedded dataset is valid")
}
