mod common;

use camtrack::batch::{self, Execution, NoiseStudy};
use camtrack::calibration::{initial_estimate, refine, reprojection_error, CalibrationError, PlaneLabel};
use camtrack::dataset::table1;
use camtrack::numerics::{minimize, MinimizeOptions};
use camtrack::synth::{default_truth, independent_project, jittered_truth, trihedral_grid, SyntheticScene};
use camtrack::tracking::{
    track_plane, track_plane_xy, track_stereo, track_surface, CalibratedCamera, PlaneConstraint, Sphere,
    SurfaceConstraint, TrackingError,
};
use camtrack::{calibrate, CalibrateOptions, CameraParameters, Extrinsics, PixelPoint, WorldPoint};
use common::{max_relative_error, rng};
use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn swung(p: &CameraParameters, angle: f64) -> CameraParameters {
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), angle).into_inner();
    let e = p.extrinsics().unwrap();
    let moved = Extrinsics::from_world_position(rz * e.rotation(), rz * e.world_position()).unwrap();
    CameraParameters::from_extrinsics(p.intrinsics, &moved).unwrap()
}

fn pattern_point(r: &mut impl Rng) -> WorldPoint {
    WorldPoint::new(r.random_range(0.0..200.0), r.random_range(0.0..200.0), r.random_range(0.0..200.0))
}

#[test]
fn noise_free_scenes_are_pipeline_fixed_points() {
    for seed in 0..10 {
        let truth = jittered_truth(seed);
        let scene = SyntheticScene::generate(truth, 25.0, 10, 0.0, seed).unwrap();
        let cal = calibrate(&scene.points).unwrap();
        assert!(max_relative_error(&truth, &cal.parameters) < 1e-5, "seed {seed}");
        for h in &cal.estimate.homographies {
            assert!(h.residual < 1e-9);
        }
    }
}

#[test]
fn refine_recovers_from_a_small_perturbation() {
    let mut r = rng(31);
    for _ in 0..5 {
        let truth = jittered_truth(r.random());
        let pts = SyntheticScene::generate(truth, 25.0, 10, 0.0, 0).unwrap().points;
        let mut x = truth.to_vector();
        for v in &mut x {
            *v *= 1.0 + 0.01 * if r.random::<bool>() { 1.0 } else { -1.0 };
        }
        let (_, report) = refine(&CameraParameters::from_slice(&x), &pts).unwrap();
        assert!(report.rms_reprojection < 1e-6, "rms {}", report.rms_reprojection);
        assert!(report.final_error <= report.initial_error);
    }
}

#[test]
fn simplex_trace_on_table1_is_monotone() {
    let pts = table1();
    let start = initial_estimate(&pts).unwrap().parameters;
    let f = |x: &[f64]| match reprojection_error(&CameraParameters::from_slice(x), &pts) {
        Ok((e, _)) => e,
        Err(_) => f64::MAX,
    };
    let m = minimize(f, &start.to_vector(), &MinimizeOptions::default()).unwrap();
    assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(m.value < reprojection_error(&start, &pts).unwrap().0);
}

#[test]
fn calibrate_reports_empty_planes() {
    let pts: Vec<_> = table1().into_iter().filter(|p| p.plane == PlaneLabel::XY).collect();
    match calibrate(&pts).unwrap_err().root() {
        CalibrationError::InsufficientPoints { shortfalls, .. } => {
            let planes: Vec<PlaneLabel> = shortfalls.iter().map(|s| s.0).collect();
            assert_eq!(planes, vec![PlaneLabel::XZ, PlaneLabel::YZ]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn cached_projection_matches_parameters() {
    let mut r = rng(32);
    for _ in 0..100 {
        let p = common::camera(&mut r);
        let cam = CalibratedCamera::new(p).unwrap();
        let product = p.intrinsics.matrix() * p.extrinsics().unwrap().matrix();
        assert!((cam.projection.0 - product).amax() <= 1e-12 * product.amax());
    }
}

#[test]
fn plane_xy_round_trips() {
    let cam = CalibratedCamera::new(default_truth()).unwrap();
    let mut r = rng(33);
    let mut cases = vec![WorldPoint::new(25.0, 25.0, 0.0), WorldPoint::new(0.0, 0.0, 0.0)];
    cases.extend((0..200).map(|_| WorldPoint::new(r.random_range(-50.0..250.0), r.random_range(-50.0..250.0), 0.0)));
    for w in cases {
        let n = cam.project(&w).unwrap();
        let back = track_plane_xy(&cam, &n).unwrap();
        assert_eq!(back.rz, 0.0);
        assert!((back.to_vector() - w.to_vector()).norm() < 1e-9);
        assert!(cam.project(&back).unwrap().distance(n) < 1e-9);
    }
}

#[test]
fn general_planes_round_trip() {
    let mut r = rng(34);
    let z50 = PlaneConstraint::new(0.0, 0.0, 1.0, -50.0).unwrap();
    for _ in 0..200 {
        let cam = CalibratedCamera::new(jittered_truth(r.random())).unwrap();
        let w = WorldPoint::new(r.random_range(0.0..200.0), r.random_range(0.0..200.0), 50.0);
        let n = cam.project(&w).unwrap();
        let back = track_plane(&cam, &z50, &n).unwrap();
        assert!((back.to_vector() - w.to_vector()).norm() < 1e-9);

        // random oblique plane through a random pattern point
        let normal = common::unit_vector(&mut r);
        let p = pattern_point(&mut r);
        let plane = PlaneConstraint::new(normal.x, normal.y, normal.z, -normal.dot(&p.to_vector())).unwrap();
        let n = cam.project(&p).unwrap();
        match track_plane(&cam, &plane, &n) {
            Ok(back) => {
                assert!(plane.evaluate(&back).abs() <= 1e-9 * (plane.d.abs() + 1.0));
                assert!(cam.project(&back).unwrap().distance(n) < 1e-9);
            }
            // grazing planes are rejected, not solved badly
            Err(TrackingError::SingularGeometry) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn ray_inside_the_plane_is_singular() {
    let truth = default_truth();
    let cam = CalibratedCamera::new(truth).unwrap();
    let center = truth.extrinsics().unwrap().world_position();
    let target = Vector3::new(10.0, 20.0, 0.0);
    // the plane containing the camera center, the target and a third point
    // off the ray
    let normal = (target - center).cross(&Vector3::new(1.0, -1.0, 0.3)).normalize();
    let plane = PlaneConstraint::new(normal.x, normal.y, normal.z, -normal.dot(&target)).unwrap();
    let n = cam.project(&WorldPoint::from(target)).unwrap();
    assert_eq!(track_plane(&cam, &plane, &n).unwrap_err(), TrackingError::SingularGeometry);
}

#[test]
fn sphere_round_trip_from_nearby_guesses() {
    let mut r = rng(35);
    for _ in 0..200 {
        let cam = CalibratedCamera::new(jittered_truth(r.random())).unwrap();
        let sphere = Sphere {
            center: Vector3::new(r.random_range(50.0..150.0), r.random_range(50.0..150.0), r.random_range(50.0..150.0)),
            radius: r.random_range(10.0..60.0),
        };
        // the visible cap faces the camera
        let towards = (cam.params.extrinsics().unwrap().world_position() - sphere.center).normalize();
        let dir = (towards + common::unit_vector(&mut r) * 0.4).normalize();
        let truth = WorldPoint::from(sphere.center + dir * sphere.radius);
        let n = cam.project(&truth).unwrap();
        let guess = WorldPoint::from(truth.to_vector() + common::unit_vector(&mut r) * 0.05 * sphere.radius);
        let sol = track_surface(&cam, &sphere, &n, &guess).unwrap();
        assert!(sphere.evaluate(&sol.point.to_vector()).abs() < 1e-9);
        assert!(cam.project(&sol.point).unwrap().distance(n) < 1e-8);
        assert!((sol.point.to_vector() - truth.to_vector()).norm() < 1e-8);
        assert!(sol.scale > 0.0);
    }
}

#[test]
fn sphere_guess_behind_finds_a_root() {
    let cam = CalibratedCamera::new(default_truth()).unwrap();
    let sphere = Sphere {
        center: Vector3::new(100.0, 100.0, 100.0),
        radius: 40.0,
    };
    let towards = (cam.params.extrinsics().unwrap().world_position() - sphere.center).normalize();
    let front = WorldPoint::from(sphere.center + towards * sphere.radius);
    let n = cam.project(&front).unwrap();
    let behind = WorldPoint::from(sphere.center - towards * sphere.radius);
    let sol = track_surface(&cam, &sphere, &n, &behind).unwrap();
    assert!(sphere.evaluate(&sol.point.to_vector()).abs() < 1e-9);
    assert!(cam.project(&sol.point).unwrap().distance(n) < 1e-8);
}

#[test]
fn plane_surface_agrees_with_plane_solver() {
    let mut r = rng(36);
    for _ in 0..200 {
        let cam = CalibratedCamera::new(jittered_truth(r.random())).unwrap();
        let normal = common::unit_vector(&mut r);
        let p = pattern_point(&mut r);
        let plane = PlaneConstraint::new(normal.x, normal.y, normal.z, -normal.dot(&p.to_vector())).unwrap();
        let n = cam.project(&p).unwrap();
        let Ok(direct) = track_plane(&cam, &plane, &n) else { continue };
        let guess = WorldPoint::from(p.to_vector() * 1.15);
        let sol = track_surface(&cam, &plane, &n, &guess).unwrap();
        assert!((sol.point.to_vector() - direct.to_vector()).norm() < 1e-8);
    }
}

#[test]
fn exact_stereo_recovers_the_point() {
    let mut r = rng(37);
    for _ in 0..200 {
        let c1 = CalibratedCamera::new(jittered_truth(r.random())).unwrap();
        let c2 = CalibratedCamera::new(swung(&jittered_truth(r.random()), r.random_range(0.5..1.5))).unwrap();
        let w = pattern_point(&mut r);
        let (n1, n2) = (c1.project(&w).unwrap(), c2.project(&w).unwrap());
        let sol = track_stereo(&c1, &c2, &n1, &n2).unwrap();
        assert!((sol.point.to_vector() - w.to_vector()).norm() < 1e-8);
        assert!(sol.residual < 1e-9);
        assert!(sol.scales.iter().all(|&c| c > 0.0));
        assert!(c1.project(&sol.point).unwrap().distance(n1) < 1e-8);
        assert!(c2.project(&sol.point).unwrap().distance(n2) < 1e-8);
    }
}

#[test]
fn noisy_stereo_error_is_bounded() {
    let mut r = rng(38);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let c1 = CalibratedCamera::new(default_truth()).unwrap();
    // a second view a quarter turn around the pattern: baseline about equal
    // to the scene distance
    let c2 = CalibratedCamera::new(swung(&default_truth(), std::f64::consts::FRAC_PI_3)).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let w = pattern_point(&mut r);
        let jitter = |n: PixelPoint, r: &mut _| PixelPoint::new(n.nx + noise.sample(r), n.ny + noise.sample(r));
        let n1 = jitter(c1.project(&w).unwrap(), &mut r);
        let n2 = jitter(c2.project(&w).unwrap(), &mut r);
        let sol = track_stereo(&c1, &c2, &n1, &n2).unwrap();
        assert!(sol.residual > 0.0);
        worst = worst.max((sol.point.to_vector() - w.to_vector()).norm());
    }
    assert!(worst < 10.0, "worst error {worst} mm");
}

#[test]
fn identical_cameras_are_rank_deficient() {
    let cam = CalibratedCamera::new(default_truth()).unwrap();
    let n = cam.project(&WorldPoint::new(50.0, 60.0, 70.0)).unwrap();
    assert_eq!(track_stereo(&cam, &cam, &n, &n).unwrap_err(), TrackingError::RankDeficient);
}

#[test]
fn grid_and_render_basics() {
    assert_eq!(trihedral_grid(25.0, 5).unwrap().len(), 15);
    let truth = default_truth();
    let a = SyntheticScene::generate(truth, 25.0, 10, 0.5, 9).unwrap();
    let b = SyntheticScene::generate(truth, 25.0, 10, 0.5, 9).unwrap();
    assert_eq!(a.points, b.points);
    let c = SyntheticScene::generate(truth, 25.0, 10, 0.5, 10).unwrap();
    assert_ne!(a.points, c.points);
    for p in &SyntheticScene::generate(truth, 25.0, 10, 0.0, 0).unwrap().points {
        assert_eq!(p.image, truth.project(&p.world).unwrap().pixel);
    }
}

#[test]
fn independent_projection_on_three_pairs() {
    let mut r = rng(39);
    for _ in 0..3 {
        let cam = common::camera(&mut r);
        let w = common::visible_point(&mut r, &cam);
        let a = cam.project(&w).unwrap().pixel;
        let b = independent_project(&cam, &w).unwrap();
        assert!(a.distance(b) < 1e-10 * a.to_vector().norm().max(1.0));
    }
}

#[test]
fn sequential_and_parallel_batches_agree() {
    let mut r = rng(40);
    let truth = default_truth();
    let cam = CalibratedCamera::new(truth).unwrap();
    let cam2 = CalibratedCamera::new(swung(&truth, 1.0)).unwrap();
    let world: Vec<WorldPoint> = (0..5000).map(|_| pattern_point(&mut r)).collect();
    let seq = batch::project_many(Execution::Sequential, &truth, &world).unwrap();
    let par = batch::project_many(Execution::Parallel, &truth, &world).unwrap();
    assert_eq!(seq, par);

    let pixels: Vec<PixelPoint> = seq.iter().map(|p| *p.as_ref().unwrap()).collect();
    let plane = PlaneConstraint::new(0.0, 0.0, 1.0, 0.0).unwrap();
    assert_eq!(
        batch::track_plane_many(Execution::Sequential, &cam, &plane, &pixels),
        batch::track_plane_many(Execution::Parallel, &cam, &plane, &pixels)
    );

    let pairs: Vec<(PixelPoint, PixelPoint)> = world.iter().map(|w| (cam.project(w).unwrap(), cam2.project(w).unwrap())).collect();
    assert_eq!(
        batch::track_stereo_many(Execution::Sequential, &cam, &cam2, &pairs),
        batch::track_stereo_many(Execution::Parallel, &cam, &cam2, &pairs)
    );

    let scenes: Vec<_> = (0..6)
        .map(|s| SyntheticScene::generate(jittered_truth(s), 25.0, 10, 0.5, s).unwrap().points)
        .collect();
    let options = CalibrateOptions::default();
    let seq = batch::calibrate_many(Execution::Sequential, &scenes, &options);
    let par = batch::calibrate_many(Execution::Parallel, &scenes, &options);
    assert_eq!(seq.len(), par.len());
    for (a, b) in seq.iter().zip(&par) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!(a.parameters, b.parameters);
        assert_eq!(a.report, b.report);
    }

    let study = NoiseStudy {
        truth,
        spacing: 25.0,
        per_plane: 10,
        noise_sigma: 0.5,
        options,
    };
    let seeds: Vec<u64> = (0..6).collect();
    let a = study.run(Execution::Sequential, &seeds);
    assert_eq!(a, study.run(Execution::Parallel, &seeds));
    for trial in a {
        let trial = trial.unwrap();
        assert!(trial.final_error <= trial.initial_error);
    }
}

#[test]
fn custom_surfaces_track() {
    // paraboloid z = (x² + y²) / 400
    let surface = camtrack::tracking::FnSurface {
        f: |p: &Vector3<f64>| p.z - (p.x * p.x + p.y * p.y) / 400.0,
        grad: |p: &Vector3<f64>| Vector3::new(-p.x / 200.0, -p.y / 200.0, 1.0),
    };
    let cam = CalibratedCamera::new(default_truth()).unwrap();
    let truth = WorldPoint::new(60.0, 40.0, (3600.0 + 1600.0) / 400.0);
    let n = cam.project(&truth).unwrap();
    let sol = track_surface(&cam, &surface, &n, &WorldPoint::new(55.0, 45.0, 10.0)).unwrap();
    assert!((sol.point.to_vector() - truth.to_vector()).norm() < 1e-8);
}
