//! World positions of image points seen by calibrated cameras: a single
//! camera with the point constrained to a plane or surface, or a stereo pair.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, Vector4};
use thiserror::Error;

use crate::calibration::CameraParameters;
use crate::geometry::{GeometryError, PixelPoint, ProjectionMatrix, WorldPoint};
use crate::numerics::{lstsq, NumericsError};

pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const NEWTON_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackingError {
    #[error("viewing ray does not intersect the constraint (singular system)")]
    SingularGeometry,
    #[error("surface tracking did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("surface tracking hit a singular Jacobian")]
    SingularJacobian,
    #[error("stereo system is rank deficient (parallel rays or identical cameras)")]
    RankDeficient,
    #[error("plane normal (A, B, C) must be nonzero and finite")]
    InvalidPlane,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numerics(NumericsError),
}

/// Plane `A x + B y + C z + D = 0` (D in millimeters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneConstraint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PlaneConstraint {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, TrackingError> {
        let ok = [a, b, c, d].iter().all(|v| v.is_finite()) && (a != 0.0 || b != 0.0 || c != 0.0);
        if !ok {
            return Err(TrackingError::InvalidPlane);
        }
        Ok(Self { a, b, c, d })
    }

    pub fn xy() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
        }
    }

    pub fn normal(&self) -> Vector3<f64> {
        Vector3::new(self.a, self.b, self.c)
    }

    pub fn evaluate(&self, p: &WorldPoint) -> f64 {
        self.a * p.rx + self.b * p.ry + self.c * p.rz + self.d
    }
}

/// Implicit surface `f(r) = 0` with its gradient.
pub trait SurfaceConstraint {
    fn evaluate(&self, r: &Vector3<f64>) -> f64;
    fn gradient(&self, r: &Vector3<f64>) -> Vector3<f64>;
}

impl SurfaceConstraint for PlaneConstraint {
    fn evaluate(&self, r: &Vector3<f64>) -> f64 {
        self.normal().dot(r) + self.d
    }

    fn gradient(&self, _r: &Vector3<f64>) -> Vector3<f64> {
        self.normal()
    }
}

/// Sphere `‖r - center‖² - radius² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl SurfaceConstraint for Sphere {
    fn evaluate(&self, r: &Vector3<f64>) -> f64 {
        (r - self.center).norm_squared() - self.radius * self.radius
    }

    fn gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        (r - self.center) * 2.0
    }
}

/// Surface given by a pair of closures.
pub struct FnSurface<F, G> {
    pub f: F,
    pub grad: G,
}

impl<F, G> SurfaceConstraint for FnSurface<F, G>
where
    F: Fn(&Vector3<f64>) -> f64,
    G: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    fn evaluate(&self, r: &Vector3<f64>) -> f64 {
        (self.f)(r)
    }

    fn gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        (self.grad)(r)
    }
}

/// Camera parameters with their projection matrix cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedCamera {
    pub params: CameraParameters,
    pub projection: ProjectionMatrix,
}

impl CalibratedCamera {
    pub fn new(params: CameraParameters) -> Result<Self, TrackingError> {
        Ok(Self {
            projection: params.projection_matrix()?,
            params,
        })
    }

    pub fn project(&self, p: &WorldPoint) -> Result<PixelPoint, TrackingError> {
        Ok(self.projection.project(p)?.pixel)
    }

    /// Projection matrix scaled to unit Frobenius norm.
    fn normalized(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let p = self.projection.0 / self.projection.0.norm();
        (p.fixed_view::<3, 3>(0, 0).into_owned(), p.column(3).into_owned())
    }
}

fn pixel_h(n: &PixelPoint) -> Vector3<f64> {
    Vector3::new(n.nx, n.ny, 1.0)
}

fn solve_square3(a: &Matrix3<f64>, b: &Vector3<f64>) -> Result<Vector3<f64>, TrackingError> {
    let a = DMatrix::from_column_slice(3, 3, a.as_slice());
    let b = DVector::from_column_slice(b.as_slice());
    match lstsq(&a, &b) {
        Ok(x) => Ok(Vector3::new(x[0], x[1], x[2])),
        Err(NumericsError::RankDeficient { .. }) => Err(TrackingError::SingularGeometry),
        Err(e) => Err(TrackingError::Numerics(e)),
    }
}

/// Point on the world XY plane seen at pixel `n`.
pub fn track_plane_xy(cam: &CalibratedCamera, n: &PixelPoint) -> Result<WorldPoint, TrackingError> {
    track_plane(cam, &PlaneConstraint::xy(), n)
}

/// Intersection of the viewing ray of `n` with a plane.
///
/// The plane equation eliminates the coordinate with the largest coefficient,
/// leaving three linear equations in the two remaining coordinates and the
/// scale factor `c`.
pub fn track_plane(
    cam: &CalibratedCamera,
    plane: &PlaneConstraint,
    n: &PixelPoint,
) -> Result<WorldPoint, TrackingError> {
    let normal = plane.normal();
    if normal.amax() == 0.0 || !normal.iter().all(|v| v.is_finite()) {
        return Err(TrackingError::InvalidPlane);
    }
    let k = normal.iamax();
    let [i, j] = match k {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let (m, p4) = cam.projection.split();
    let ck = normal[k];
    let col_i = m.column(i) - m.column(k) * (normal[i] / ck);
    let col_j = m.column(j) - m.column(k) * (normal[j] / ck);
    let a = Matrix3::from_columns(&[-col_i, -col_j, pixel_h(n)]);
    let rhs = p4 - m.column(k) * (plane.d / ck);
    let x = solve_square3(&a, &rhs)?;

    let mut r = Vector3::zeros();
    r[i] = x[0];
    r[j] = x[1];
    r[k] = -(normal[i] * x[0] + normal[j] * x[1] + plane.d) / ck + 0.0;
    Ok(r.into())
}

/// Result of [`track_surface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSolution {
    pub point: WorldPoint,
    /// Scale factor relative to the unit-norm projection matrix.
    pub scale: f64,
    pub iterations: usize,
}

fn surface_residual(
    m: &Matrix3<f64>,
    p4: &Vector3<f64>,
    nh: &Vector3<f64>,
    surface: &dyn SurfaceConstraint,
    x: &Vector4<f64>,
) -> Vector4<f64> {
    let r = x.xyz();
    let img = nh * x.w - m * r - p4;
    Vector4::new(img.x, img.y, img.z, surface.evaluate(&r))
}

/// Point on an implicit surface seen at pixel `n`, by damped Newton iteration
/// from `guess` on the four equations (ray through the pixel, surface).
///
/// On surfaces the ray crosses more than once the root nearest the guess's
/// basin is returned.
pub fn track_surface(
    cam: &CalibratedCamera,
    surface: &dyn SurfaceConstraint,
    n: &PixelPoint,
    guess: &WorldPoint,
) -> Result<SurfaceSolution, TrackingError> {
    let (m, p4) = cam.normalized();
    let nh = pixel_h(n);
    // start on the viewing ray r(c) = origin + c * dir, at the point closest
    // to the guess, so the three linear equations hold from the first iterate
    let dir = solve_square3(&m, &nh).map_err(|_| TrackingError::SingularJacobian)?;
    let origin = solve_square3(&m, &-p4).map_err(|_| TrackingError::SingularJacobian)?;
    let c0 = dir.dot(&(guess.to_vector() - origin)) / dir.norm_squared();
    let r0 = origin + dir * c0;
    let mut x = Vector4::new(r0.x, r0.y, r0.z, c0);
    let mut f = surface_residual(&m, &p4, &nh, surface, &x);

    for iteration in 0..=NEWTON_MAX_ITERATIONS {
        if !f.iter().all(|v| v.is_finite()) {
            return Err(TrackingError::NoConvergence(iteration));
        }
        if f.amax() < NEWTON_TOLERANCE {
            return Ok(SurfaceSolution {
                point: x.xyz().into(),
                scale: x.w,
                iterations: iteration,
            });
        }
        if iteration == NEWTON_MAX_ITERATIONS {
            break;
        }
        let grad = surface.gradient(&x.xyz());
        let mut jac = DMatrix::<f64>::zeros(4, 4);
        for row in 0..3 {
            for col in 0..3 {
                jac[(row, col)] = -m[(row, col)];
            }
            jac[(row, 3)] = nh[row];
        }
        for col in 0..3 {
            jac[(3, col)] = grad[col];
        }
        let rhs = DVector::from_iterator(4, f.iter().map(|v| -v));
        let step = match lstsq(&jac, &rhs) {
            Ok(s) => Vector4::new(s[0], s[1], s[2], s[3]),
            Err(NumericsError::RankDeficient { .. }) => return Err(TrackingError::SingularJacobian),
            Err(e) => return Err(TrackingError::Numerics(e)),
        };

        // halve the step while the residual grows
        let norm0 = f.norm();
        let mut t = 1.0;
        let mut trial = x + step;
        let mut ft = surface_residual(&m, &p4, &nh, surface, &trial);
        while !(ft.norm() <= norm0) && t > 1e-6 {
            t *= 0.5;
            trial = x + step * t;
            ft = surface_residual(&m, &p4, &nh, surface, &trial);
        }
        x = trial;
        f = ft;
    }
    Err(TrackingError::NoConvergence(NEWTON_MAX_ITERATIONS))
}

/// Result of [`track_stereo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoSolution {
    pub point: WorldPoint,
    /// 2-norm of the least-squares residual of the six equations.
    pub residual: f64,
    /// Scale factors of both cameras (unit-norm projection matrices).
    pub scales: [f64; 2],
}

/// Triangulation from two cameras: least-squares solution of the six
/// equations in `(r, c1, c2)` through the pseudo-inverse.
pub fn track_stereo(
    cam1: &CalibratedCamera,
    cam2: &CalibratedCamera,
    n1: &PixelPoint,
    n2: &PixelPoint,
) -> Result<StereoSolution, TrackingError> {
    let mut a = DMatrix::<f64>::zeros(6, 5);
    let mut b = DVector::<f64>::zeros(6);
    for (block, (cam, n)) in [(cam1, n1), (cam2, n2)].into_iter().enumerate() {
        let (m, p4) = cam.normalized();
        let nh = pixel_h(n);
        for row in 0..3 {
            for col in 0..3 {
                a[(3 * block + row, col)] = -m[(row, col)];
            }
            a[(3 * block + row, 3 + block)] = nh[row];
            b[3 * block + row] = p4[row];
        }
    }
    let x = match lstsq(&a, &b) {
        Ok(x) => x,
        Err(NumericsError::RankDeficient { .. }) => return Err(TrackingError::RankDeficient),
        Err(e) => return Err(TrackingError::Numerics(e)),
    };
    let residual = (&a * &x - &b).norm();
    Ok(StereoSolution {
        point: WorldPoint::new(x[0], x[1], x[2]),
        residual,
        scales: [x[3], x[4]],
    })
}
