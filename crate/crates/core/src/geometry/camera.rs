use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};

use super::{CameraPoint, GeometryError, Hom2, Hom3, PixelPoint, WorldPoint};

const ROTATION_TOL: f64 = 1e-9;
const SCALE_TOL: f64 = 1e-12;

/// Pinhole intrinsics in pixels. Under the image-axis convention used here the
/// focal terms are negative: `alpha = beta = -f/s` for square pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n0x: f64,
    pub n0y: f64,
}

impl Intrinsics {
    pub fn new(alpha: f64, beta: f64, gamma: f64, n0x: f64, n0y: f64) -> Result<Self, GeometryError> {
        let i = Self {
            alpha,
            beta,
            gamma,
            n0x,
            n0y,
        };
        i.validate()?;
        Ok(i)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let all = [self.alpha, self.beta, self.gamma, self.n0x, self.n0y];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("non-finite value".into()));
        }
        if self.alpha == 0.0 || self.beta == 0.0 {
            return Err(GeometryError::InvalidIntrinsics(
                "alpha and beta must be nonzero".into(),
            ));
        }
        Ok(())
    }

    /// Ideal camera: focal length `f` and pixel size `s` in meters, sensor of
    /// `nx × ny` pixels with the optical axis through its center.
    pub fn from_physical(f: f64, s: f64, nx: f64, ny: f64) -> Result<Self, GeometryError> {
        for (name, v) in [("f", f), ("s", s), ("Nx", nx), ("Ny", ny)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GeometryError::InvalidPhysical(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let focal = -f / s;
        Self::new(focal, focal, 0.0, nx / 2.0, ny / 2.0)
    }

    /// `[[alpha, gamma, n0x], [0, beta, n0y], [0, 0, 1]]`
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.alpha, self.gamma, self.n0x, //
            0.0, self.beta, self.n0y, //
            0.0, 0.0, 1.0,
        )
    }

    /// Closed-form inverse of the upper-triangular intrinsic matrix.
    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        let (a, b, g, x0, y0) = (self.alpha, self.beta, self.gamma, self.n0x, self.n0y);
        Matrix3::new(
            1.0 / a,
            -g / (a * b),
            (g * y0 - x0 * b) / (a * b),
            0.0,
            1.0 / b,
            -y0 / b,
            0.0,
            0.0,
            1.0,
        )
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.gamma, self.n0x, self.n0y]
    }
}

/// Camera pose: `rotation` is `A_cam` (camera-frame components to world-frame
/// components) and `r_cam_bar` is the camera position resolved in the camera
/// frame, `A_camᵀ r_cam`, in millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrinsics {
    rotation: Matrix3<f64>,
    r_cam_bar: Vector3<f64>,
}

impl Extrinsics {
    pub fn new(rotation: Matrix3<f64>, r_cam_bar: Vector3<f64>) -> Result<Self, GeometryError> {
        check_rotation(&rotation)?;
        if !r_cam_bar.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NotARotation(f64::NAN));
        }
        Ok(Self {
            rotation,
            r_cam_bar,
        })
    }

    /// Pose from the world-frame camera position `r_cam`.
    pub fn from_world_position(rotation: Matrix3<f64>, r_cam: Vector3<f64>) -> Result<Self, GeometryError> {
        Self::new(rotation, rotation.transpose() * r_cam)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            r_cam_bar: Vector3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn r_cam_bar(&self) -> &Vector3<f64> {
        &self.r_cam_bar
    }

    /// World-frame camera position `A_cam r̄_cam`.
    pub fn world_position(&self) -> Vector3<f64> {
        self.rotation * self.r_cam_bar
    }

    /// `[A_camᵀ | -r̄_cam]`
    pub fn matrix(&self) -> Matrix3x4<f64> {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.transpose());
        m.set_column(3, &(-self.r_cam_bar));
        m
    }
}

pub(crate) fn check_rotation(a: &Matrix3<f64>) -> Result<(), GeometryError> {
    if !a.iter().all(|v| v.is_finite()) {
        return Err(GeometryError::NotARotation(f64::NAN));
    }
    let ortho = (a.transpose() * a - Matrix3::identity()).amax();
    let det = (a.determinant() - 1.0).abs();
    let dev = ortho.max(det);
    if dev > ROTATION_TOL {
        return Err(GeometryError::NotARotation(dev));
    }
    Ok(())
}

/// `ū = A_camᵀ (r - r_cam)`
pub fn world_to_camera(e: &Extrinsics, p: &WorldPoint) -> CameraPoint {
    (e.rotation.tr_mul(&p.to_vector()) - e.r_cam_bar).into()
}

/// `r = r_cam + A_cam ū`
pub fn camera_to_world(e: &Extrinsics, u: &CameraPoint) -> WorldPoint {
    (e.rotation * (u.to_vector() + e.r_cam_bar)).into()
}

/// Projected pixel together with the scale factor `c`; `c > 0` means the
/// point lies in front of the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: PixelPoint,
    pub scale: f64,
}

/// `P = M_int M_ext`, a 3×4 matrix mapping homogeneous world points to
/// homogeneous pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix(pub Matrix3x4<f64>);

impl ProjectionMatrix {
    pub fn new(i: &Intrinsics, e: &Extrinsics) -> Self {
        Self(i.matrix() * e.matrix())
    }

    pub fn apply(&self, h: &Hom3) -> Hom2 {
        Hom2(self.0 * h.0)
    }

    pub fn project(&self, p: &WorldPoint) -> Result<Projection, GeometryError> {
        let h = self.0 * Vector4::new(p.rx, p.ry, p.rz, 1.0);
        let c = h.z;
        if !(c.abs() > SCALE_TOL) {
            return Err(GeometryError::DegenerateProjection(c));
        }
        Ok(Projection {
            pixel: PixelPoint::new(h.x / c, h.y / c),
            scale: c,
        })
    }

    /// Projection of an arbitrary homogeneous representative.
    pub fn project_hom(&self, h: &Hom3) -> Result<PixelPoint, GeometryError> {
        Ok(self.apply(h).dehom()?.into())
    }

    /// Left 3×3 block and last column.
    pub fn split(&self) -> (Matrix3<f64>, Vector3<f64>) {
        (self.0.fixed_view::<3, 3>(0, 0).into_owned(), self.0.column(3).into_owned())
    }
}

/// Pixel position of a world point.
pub fn project(i: &Intrinsics, e: &Extrinsics, p: &WorldPoint) -> Result<Projection, GeometryError> {
    ProjectionMatrix::new(i, e).project(p)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rodriguez_to_matrix;
    use crate::geometry::{hom3, RodriguezParams};

    fn rx(deg: f64) -> Matrix3<f64> {
        let (s, c) = deg.to_radians().sin_cos();
        Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
    }

    #[test]
    fn intrinsics_from_physical_camera() {
        let i = Intrinsics::from_physical(0.01, 1e-5, 1280.0, 720.0).unwrap();
        assert!((i.alpha + 1000.0).abs() < 1e-9);
        assert!((i.beta + 1000.0).abs() < 1e-9);
        assert_eq!(i.gamma, 0.0);
        assert_eq!((i.n0x, i.n0y), (640.0, 360.0));

        let unit = Intrinsics::from_physical(2e-3, 2e-3, 10.0, 10.0).unwrap();
        assert_eq!(unit.alpha, -1.0);

        assert!(matches!(
            Intrinsics::from_physical(0.0, 1e-5, 1280.0, 720.0),
            Err(GeometryError::InvalidPhysical(_))
        ));
        assert!(Intrinsics::from_physical(0.01, -1.0, 1280.0, 720.0).is_err());
    }

    #[test]
    fn intrinsics_matrix_layout() {
        let cases = [
            Intrinsics::new(-1000.0, -1000.0, 0.0, 640.0, 360.0).unwrap(),
            Intrinsics::new(-1.0, -1.0, 0.0, 1.0, 1.0).unwrap(),
            Intrinsics::new(-1000.0, -995.0, 2.0, 641.5, 359.0).unwrap(),
        ];
        for i in cases {
            let m = i.matrix();
            assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![i.alpha, i.gamma, i.n0x]);
            assert_eq!(m.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, i.beta, i.n0y]);
            assert_eq!(m.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
            assert!((m * i.inverse_matrix() - Matrix3::identity()).amax() < 1e-14);
        }
        assert!(Intrinsics::new(0.0, -1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn extrinsics_matrix_layout() {
        let m = Extrinsics::identity().matrix();
        assert_eq!(m.fixed_view::<3, 3>(0, 0).into_owned(), Matrix3::identity());
        assert_eq!(m.column(3).into_owned(), Vector3::zeros());

        let e = Extrinsics::new(Matrix3::identity(), Vector3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(e.matrix().column(3).into_owned(), Vector3::new(-1.0, -2.0, -3.0));

        let r = rx(90.0);
        let e = Extrinsics::new(r, Vector3::zeros()).unwrap();
        assert_eq!(e.matrix().fixed_view::<3, 3>(0, 0).into_owned(), r.transpose());
    }

    #[test]
    fn rejects_non_rotation() {
        assert!(matches!(
            Extrinsics::new(Matrix3::identity() * 1.01, Vector3::zeros()),
            Err(GeometryError::NotARotation(_))
        ));
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Extrinsics::new(reflection, Vector3::zeros()).is_err());
    }

    #[test]
    fn frame_transforms() {
        let e = Extrinsics::identity();
        let u = world_to_camera(&e, &WorldPoint::new(1.0, 2.0, 3.0));
        assert_eq!(u, CameraPoint::new(1.0, 2.0, 3.0));

        let r = rodriguez_to_matrix(&RodriguezParams::new(0.2, -0.4, 0.1));
        let cam = Vector3::new(300.0, 200.0, 500.0);
        let e = Extrinsics::from_world_position(r, cam).unwrap();
        let u = world_to_camera(&e, &WorldPoint::from(cam));
        assert!(u.to_vector().norm() < 1e-12);
        assert!((e.world_position() - cam).amax() < 1e-12);

        let back = camera_to_world(&e, &CameraPoint::new(0.0, 0.0, 0.0));
        assert!((back.to_vector() - cam).amax() < 1e-12);
    }

    #[test]
    fn unit_camera_projection() {
        let i = Intrinsics::new(-1.0, -1.0, 0.0, 1.0, 1.0).unwrap();
        let e = Extrinsics::identity();
        let p = project(&i, &e, &WorldPoint::new(1.0, 1.0, -1.0)).unwrap();
        assert_eq!(p.pixel, PixelPoint::new(2.0, 2.0));
        assert_eq!(p.scale, -1.0);

        let i = Intrinsics::new(-800.0, -810.0, 1.5, 320.0, 240.0).unwrap();
        let on_axis = project(&i, &e, &WorldPoint::new(0.0, 0.0, 250.0)).unwrap();
        assert_eq!(on_axis.pixel, PixelPoint::new(320.0, 240.0));
        assert_eq!(on_axis.scale, 250.0);
    }

    #[test]
    fn degenerate_projection_in_camera_plane() {
        let i = Intrinsics::new(-1.0, -1.0, 0.0, 1.0, 1.0).unwrap();
        let err = project(&i, &Extrinsics::identity(), &WorldPoint::new(1.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateProjection(_)));
    }

    #[test]
    fn homogeneous_scale_does_not_change_projection() {
        let i = Intrinsics::new(-900.0, -905.0, 0.5, 600.0, 350.0).unwrap();
        let r = rodriguez_to_matrix(&RodriguezParams::new(0.1, 0.3, -0.2));
        let e = Extrinsics::from_world_position(r, Vector3::new(100.0, -50.0, -700.0)).unwrap();
        let pm = ProjectionMatrix::new(&i, &e);
        let h = hom3(Vector3::new(20.0, 30.0, 40.0));
        let a = pm.project_hom(&h).unwrap();
        for k in [-3.0, 1e-4, 250.0] {
            let b = pm.project_hom(&h.scaled(k)).unwrap();
            assert!(a.distance(b) < 1e-9);
        }
    }
}
