use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, Vector2};

use super::{CalibrationError, CalibrationPoint, PlaneLabel};
use crate::geometry::PixelPoint;
use crate::numerics::sym_eig;

/// Two rows per point and nine unknowns: five points are the minimum.
pub const MIN_POINTS_PER_PLANE: usize = 5;

/// Minimum ratio between the second-smallest and smallest eigenvalue before
/// the null vector is considered well defined.
pub(crate) const SEPARATION_RATIO: f64 = 1e3;
/// Eigenvalues below this fraction of the largest are treated as zero when
/// judging the separation.
pub(crate) const NULL_FLOOR: f64 = 1e-15;

/// Plane-to-image homography, normalized to unit Frobenius norm and signed so
/// that the scale factor at the plane's point centroid is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography {
    pub matrix: Matrix3<f64>,
    pub plane: PlaneLabel,
    /// Centroid of the in-plane coordinates used for the sign convention.
    pub centroid: Vector2<f64>,
    /// `‖L ĥ‖` of the stacked point equations.
    pub residual: f64,
}

impl Homography {
    /// Normalizes `matrix` and fixes its sign.
    pub fn new(matrix: Matrix3<f64>, plane: PlaneLabel, centroid: Vector2<f64>) -> Self {
        let mut m = matrix / matrix.norm();
        if scale_at(&m, &centroid) < 0.0 {
            m = -m;
        }
        Self {
            matrix: m,
            plane,
            centroid,
            residual: 0.0,
        }
    }

    /// Scale factor `c` predicted at in-plane position `ab`.
    pub fn scale_at(&self, ab: &Vector2<f64>) -> f64 {
        scale_at(&self.matrix, ab)
    }

    /// Row-major 9-vector.
    pub fn to_vector(&self) -> [f64; 9] {
        let m = &self.matrix;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }
}

fn scale_at(m: &Matrix3<f64>, ab: &Vector2<f64>) -> f64 {
    m[(2, 0)] * ab.x + m[(2, 1)] * ab.y + m[(2, 2)]
}

/// The two homogeneous equations one correspondence contributes to `L ĥ = 0`,
/// where `planar` holds the two in-plane world coordinates.
pub fn build_l_rows(image: &PixelPoint, planar: &Vector2<f64>) -> SMatrix<f64, 2, 9> {
    let (nx, ny) = (image.nx, image.ny);
    let (a, b) = (planar.x, planar.y);
    SMatrix::<f64, 2, 9>::from_row_slice(&[
        -a, -b, -1.0, 0.0, 0.0, 0.0, nx * a, nx * b, nx, //
        0.0, 0.0, 0.0, -a, -b, -1.0, ny * a, ny * b, ny,
    ])
}

/// Homography of one plane as the eigenvector of the smallest eigenvalue of
/// `LᵀL`, with `L` stacking [`build_l_rows`] for every point on the plane.
pub fn estimate_homography(
    points: &[CalibrationPoint],
    plane: PlaneLabel,
) -> Result<Homography, CalibrationError> {
    let on_plane: Vec<&CalibrationPoint> = points.iter().filter(|p| p.plane == plane).collect();
    if on_plane.len() < MIN_POINTS_PER_PLANE {
        return Err(CalibrationError::InsufficientPoints {
            required: MIN_POINTS_PER_PLANE,
            shortfalls: vec![(plane, on_plane.len())],
        });
    }
    for (i, p) in on_plane.iter().enumerate() {
        if on_plane[..i].iter().any(|q| q.world == p.world) {
            return Err(CalibrationError::DuplicatePoints(plane));
        }
    }

    let n = on_plane.len();
    let mut l = DMatrix::<f64>::zeros(2 * n, 9);
    let mut centroid = Vector2::zeros();
    for (k, p) in on_plane.iter().enumerate() {
        let ab = plane.planar_coords(&p.world);
        centroid += ab / n as f64;
        l.view_mut((2 * k, 0), (2, 9)).copy_from(&build_l_rows(&p.image, &ab));
    }

    let ltl = l.transpose() * &l;
    let h = null_vector(&ltl, &format!("homography of plane {plane}"))?;
    let mut out = Homography::new(Matrix3::from_row_slice(h.as_slice()), plane, centroid);
    out.residual = (&l * DVector::from_row_slice(&out.to_vector())).norm();
    Ok(out)
}

/// Eigenvector of the smallest eigenvalue of a Gram matrix, rejecting an
/// ambiguous (multi-dimensional) null space.
pub(crate) fn null_vector(gram: &DMatrix<f64>, context: &str) -> Result<DVector<f64>, CalibrationError> {
    let eig = sym_eig(gram)?;
    let lam = &eig.eigenvalues;
    let largest = lam[lam.len() - 1].abs();
    let smallest = lam[0].max(0.0);
    let second = lam[1];
    if second <= SEPARATION_RATIO * smallest || second <= NULL_FLOOR * largest {
        return Err(CalibrationError::DegenerateConfiguration {
            context: context.to_string(),
            smallest: lam[0],
            second,
        });
    }
    let v = eig.eigenvectors.column(0).into_owned();
    Ok(v.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WorldPoint;

    #[test]
    fn l_rows_at_origin() {
        let l = build_l_rows(&PixelPoint::new(0.0, 0.0), &Vector2::new(0.0, 0.0));
        let r0: Vec<f64> = l.row(0).iter().copied().collect();
        let r1: Vec<f64> = l.row(1).iter().copied().collect();
        assert_eq!(r0, vec![0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r1, vec![0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn l_rows_first_table_point() {
        let l = build_l_rows(&PixelPoint::new(674.0, 254.0), &Vector2::new(25.0, 25.0));
        let r0: Vec<f64> = l.row(0).iter().copied().collect();
        assert_eq!(
            r0,
            vec![-25.0, -25.0, -1.0, 0.0, 0.0, 0.0, 16850.0, 16850.0, 674.0]
        );
        let r1: Vec<f64> = l.row(1).iter().copied().collect();
        assert_eq!(r1, vec![0.0, 0.0, 0.0, -25.0, -25.0, -1.0, 6350.0, 6350.0, 254.0]);
    }

    fn synthetic(h: &Matrix3<f64>, n: usize) -> Vec<CalibrationPoint> {
        (0..n)
            .map(|k| {
                let a = 25.0 + 50.0 * (k % 4) as f64;
                let b = 25.0 + 50.0 * (k / 4) as f64 + 7.0 * (k % 3) as f64;
                let img = h * nalgebra::Vector3::new(a, b, 1.0);
                CalibrationPoint::new(
                    PixelPoint::new(img.x / img.z, img.y / img.z),
                    WorldPoint::new(a, b, 0.0),
                    PlaneLabel::XY,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn recovers_known_homography() {
        let truth = Matrix3::new(-1.1, 0.3, 650.0, 0.2, -0.9, 260.0, 1e-4, -2e-4, 1.0);
        let pts = synthetic(&truth, 10);
        let h = estimate_homography(&pts, PlaneLabel::XY).unwrap();
        let t = truth / truth.norm();
        let dev = (h.matrix - t).amax().min((h.matrix + t).amax());
        assert!(dev < 1e-8, "deviation {dev}");
        assert!(h.residual < 1e-9, "residual {}", h.residual);
        assert!((h.matrix.norm() - 1.0).abs() < 1e-14);
        assert!(h.scale_at(&h.centroid) > 0.0);
    }

    #[test]
    fn four_points_are_not_enough() {
        let truth = Matrix3::identity();
        let pts = synthetic(&truth, 4);
        assert!(matches!(
            estimate_homography(&pts, PlaneLabel::XY),
            Err(CalibrationError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts: Vec<CalibrationPoint> = (0..8)
            .map(|k| {
                let a = 10.0 * k as f64;
                CalibrationPoint::new(
                    PixelPoint::new(100.0 + 3.0 * a, 50.0 + a),
                    WorldPoint::new(a, 2.0 * a, 0.0),
                    PlaneLabel::XY,
                )
                .unwrap()
            })
            .collect();
        assert!(matches!(
            estimate_homography(&pts, PlaneLabel::XY),
            Err(CalibrationError::DegenerateConfiguration { .. })
        ));
    }

    #[test]
    fn duplicates_are_rejected() {
        let truth = Matrix3::identity();
        let mut pts = synthetic(&truth, 6);
        pts.push(pts[0]);
        assert_eq!(
            estimate_homography(&pts, PlaneLabel::XY).unwrap_err(),
            CalibrationError::DuplicatePoints(PlaneLabel::XY)
        );
    }
}
