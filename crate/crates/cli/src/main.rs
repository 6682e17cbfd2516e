// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use camtrack::calibration::reprojection_error;
use camtrack::io::{self, IoError};
use camtrack::synth::{self, SynthError, SyntheticScene};
use camtrack::tracking::{self, CalibratedCamera, PlaneConstraint, Sphere, SurfaceConstraint};
use camtrack::{
    calibrate_with, CalibrateOptions, CalibrationError, CameraParameters, GeometryError, PixelPoint,
    TrackingError, WorldPoint,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "camtrack", version, about = "Trihedral-pattern camera calibration and point tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a camera from a correspondence CSV.
    Calibrate {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Stop after the closed-form estimate.
        #[arg(long)]
        no_refine: bool,
        /// Print the reprojection report.
        #[arg(long)]
        report: bool,
    },
    /// Project a world point (mm) to pixels.
    Project {
        #[arg(long)]
        camera: PathBuf,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        world: [f64; 3],
    },
    /// Recover the world position of a pixel.
    #[command(subcommand)]
    Track(Track),
    /// Write a synthetic correspondence CSV.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 25.0)]
        spacing: f64,
        #[arg(long, default_value_t = 10)]
        per_plane: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write the ground-truth camera to this JSON file.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Camera to render with instead of the built-in default.
        #[arg(long)]
        camera: Option<PathBuf>,
    },
    /// Reprojection error of a camera on a correspondence CSV.
    Eval {
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
}

#[derive(Args)]
struct Single {
    #[arg(long)]
    camera: PathBuf,
    #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
    pixel: [f64; 2],
}

#[derive(Subcommand)]
enum Track {
    /// Point on the world XY plane.
    PlaneXy(Single),
    /// Point on the plane A x + B y + C z + D = 0.
    Plane {
        #[command(flatten)]
        view: Single,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        plane: [f64; 4],
    },
    /// Point on a sphere or plane, by Newton iteration from a guess.
    Surface {
        #[command(flatten)]
        view: Single,
        /// Sphere center and radius `cx,cy,cz,R`.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, conflicts_with = "plane", required_unless_present = "plane")]
        sphere: Option<[f64; 4]>,
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true)]
        plane: Option<[f64; 4]>,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        guess: [f64; 3],
    },
    /// Triangulate from two cameras.
    Stereo {
        #[command(flatten)]
        view: Single,
        #[arg(long)]
        camera2: PathBuf,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        pixel2: [f64; 2],
    },
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number")))
        .collect::<Result<_, _>>()?;
    let array: [f64; N] = values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))?;
    if array.iter().all(|v| v.is_finite()) {
        Ok(array)
    } else {
        Err("values must be finite".into())
    }
}

fn parse_vec2(s: &str) -> Result<[f64; 2], String> {
    parse_list(s)
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    parse_list(s)
}

fn parse_vec4(s: &str) -> Result<[f64; 4], String> {
    parse_list(s)
}

/// A failure with its exit code: 2 for bad input, 3 for numerical failure.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn numerical(message: impl ToString) -> Failure {
    Failure {
        code: 3,
        message: message.to_string(),
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        input(e)
    }
}

impl From<CalibrationError> for Failure {
    fn from(e: CalibrationError) -> Self {
        if e.is_numerical() {
            numerical(e)
        } else {
            input(e)
        }
    }
}

impl From<TrackingError> for Failure {
    fn from(e: TrackingError) -> Self {
        match e {
            TrackingError::InvalidPlane => input(e),
            TrackingError::Geometry(GeometryError::InvalidIntrinsics(_) | GeometryError::NotARotation(_)) => input(e),
            _ => numerical(e),
        }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::DegenerateProjection(_) | GeometryError::PointAtInfinity => numerical(e),
            _ => input(e),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Geometry(g) => g.into(),
            other => input(other),
        }
    }
}

fn camera(path: &PathBuf) -> Result<CalibratedCamera, Failure> {
    Ok(CalibratedCamera::new(io::load_camera(path)?)?)
}

fn pixel(p: [f64; 2]) -> PixelPoint {
    PixelPoint::new(p[0], p[1])
}

fn print_point(out: &mut String, p: &WorldPoint) {
    let _ = writeln!(out, "{} {} {}", p.rx, p.ry, p.rz);
}

fn run(cli: Cli) -> Result<String, Failure> {
    let mut text = String::new();
    let out = &mut text;
    match cli.command {
        Command::Calibrate {
            points,
            out: out_path,
            no_refine,
            report,
        } => {
            let pts = io::load_correspondences(&points)?;
            let options = CalibrateOptions {
                refine: !no_refine,
                ..CalibrateOptions::default()
            };
            let cal = calibrate_with(&pts, &options)?;
            io::save_camera(&out_path, &cal.parameters, Some(&cal.report))?;
            if report {
                let r = &cal.report;
                let _ = writeln!(out, "initial_error {}", r.initial_error);
                let _ = writeln!(out, "final_error {}", r.final_error);
                let _ = writeln!(out, "rms {}", r.rms_reprojection);
                let _ = writeln!(out, "max_error {}", r.max_error());
                let _ = writeln!(out, "iterations {}", r.iterations);
            }
        }
        Command::Project { camera: path, world } => {
            let params = io::load_camera(&path)?;
            let proj = params.project(&WorldPoint::new(world[0], world[1], world[2]))?;
            let _ = writeln!(out, "{} {}", proj.pixel.nx, proj.pixel.ny);
        }
        Command::Track(track) => match track {
            Track::PlaneXy(view) => {
                let cam = camera(&view.camera)?;
                print_point(out, &tracking::track_plane_xy(&cam, &pixel(view.pixel))?);
            }
            Track::Plane { view, plane } => {
                let cam = camera(&view.camera)?;
                let plane = PlaneConstraint::new(plane[0], plane[1], plane[2], plane[3])?;
                print_point(out, &tracking::track_plane(&cam, &plane, &pixel(view.pixel))?);
            }
            Track::Surface {
                view,
                sphere,
                plane,
                guess,
            } => {
                let cam = camera(&view.camera)?;
                let surface: Box<dyn SurfaceConstraint> = match (sphere, plane) {
                    (Some(s), _) => {
                        if !(s[3] > 0.0) {
                            return Err(input("sphere radius must be positive"));
                        }
                        Box::new(Sphere {
                            center: [s[0], s[1], s[2]].into(),
                            radius: s[3],
                        })
                    }
                    (None, Some(p)) => Box::new(PlaneConstraint::new(p[0], p[1], p[2], p[3])?),
                    (None, None) => return Err(input("one of --sphere or --plane is required")),
                };
                let guess = WorldPoint::new(guess[0], guess[1], guess[2]);
                let sol = tracking::track_surface(&cam, surface.as_ref(), &pixel(view.pixel), &guess)?;
                print_point(out, &sol.point);
            }
            Track::Stereo { view, camera2, pixel2 } => {
                let cam1 = camera(&view.camera)?;
                let cam2 = camera(&camera2)?;
                let sol = tracking::track_stereo(&cam1, &cam2, &pixel(view.pixel), &pixel(pixel2))?;
                print_point(out, &sol.point);
                let _ = writeln!(out, "residual {}", sol.residual);
            }
        },
        Command::Synth {
            seed,
            sigma,
            spacing,
            per_plane,
            out: out_path,
            truth,
            camera,
        } => {
            let truth_params: CameraParameters = match &camera {
                Some(path) => io::load_camera(path)?,
                None => synth::default_truth(),
            };
            let scene = SyntheticScene::generate(truth_params, spacing, per_plane, sigma, seed)?;
            io::save_correspondences(&out_path, &scene.points)?;
            if let Some(path) = truth {
                io::save_camera(&path, &scene.truth, None)?;
            }
        }
        Command::Eval { camera: path, points } => {
            let params = io::load_camera(&path)?;
            let pts = io::load_correspondences(&points)?;
            let (e, per_point) = reprojection_error(&params, &pts)?;
            let _ = writeln!(out, "E {e}");
            let _ = writeln!(out, "RMS {}", (e / pts.len() as f64).sqrt());
            for (k, (eps, p)) in per_point.iter().zip(&pts).enumerate() {
                let _ = writeln!(out, "point {} {} {eps}", k + 1, p.plane);
            }
        }
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
