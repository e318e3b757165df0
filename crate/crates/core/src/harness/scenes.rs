//! Synthetic scenes: noisy straight/dashed 2D lines in a 600×600 window,
//! and exact correspondence scenes for the three two-view model kinds.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::geometry::{DataPoint, ModelParams};

/// Side length of the synthetic window, in pixels.
pub const WINDOW_SIZE: f64 = 600.0;

const LINE_INLIERS: usize = 100;
const DASH_KNOTS: usize = 10;
const DASH_SAMPLES_PER_KNOT: usize = 10;
const DASH_SPREAD: f64 = 10.0;
/// Lines clipped to segments shorter than this are resampled.
const MIN_SEGMENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineStyle {
    Straight,
    Dashed,
}

impl fmt::Display for LineStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineStyle::Straight => "straight",
            LineStyle::Dashed => "dashed",
        })
    }
}

impl FromStr for LineStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "straight" => Ok(LineStyle::Straight),
            "dashed" => Ok(LineStyle::Dashed),
            other => Err(Error::InvalidInput(format!("unknown line style `{other}`"))),
        }
    }
}

/// A noisy 2D line scene with uniform clutter; inliers come first in
/// `points`, `inlier_mask` marks them.
#[derive(Debug, Clone)]
pub struct SyntheticLineScene {
    pub points: Vec<DataPoint>,
    pub ground_truth: ModelParams,
    pub inlier_mask: Vec<bool>,
    pub sigma: f64,
    pub outlier_count: usize,
    pub style: LineStyle,
}

/// An exact (optionally noisy) correspondence scene for affine/homography/
/// fundamental estimation; inliers first.
#[derive(Debug, Clone)]
pub struct CorrespondenceScene {
    pub points: Vec<DataPoint>,
    pub ground_truth: ModelParams,
    pub inlier_mask: Vec<bool>,
}

/// A random in-window line: direction, a point on it, and the parameter
/// range of the clipped segment.
struct WindowLine {
    origin: (f64, f64),
    direction: (f64, f64),
    t_min: f64,
    t_max: f64,
}

fn sample_window_line(rng: &mut ChaCha8Rng) -> WindowLine {
    loop {
        let origin = (
            rng.random_range(0.0..WINDOW_SIZE),
            rng.random_range(0.0..WINDOW_SIZE),
        );
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let direction = (angle.cos(), angle.sin());
        let mut t_min = f64::NEG_INFINITY;
        let mut t_max = f64::INFINITY;
        for (o, d) in [(origin.0, direction.0), (origin.1, direction.1)] {
            if d.abs() < 1e-12 {
                continue;
            }
            let a = (0.0 - o) / d;
            let b = (WINDOW_SIZE - o) / d;
            t_min = t_min.max(a.min(b));
            t_max = t_max.min(a.max(b));
        }
        if t_max - t_min >= MIN_SEGMENT {
            return WindowLine {
                origin,
                direction,
                t_min,
                t_max,
            };
        }
    }
}

impl WindowLine {
    fn at(&self, t: f64) -> (f64, f64) {
        (
            self.origin.0 + t * self.direction.0,
            self.origin.1 + t * self.direction.1,
        )
    }

    fn implicit(&self) -> ModelParams {
        let (dx, dy) = self.direction;
        let a = -dy;
        let b = dx;
        let c = -(a * self.origin.0 + b * self.origin.1);
        ModelParams::line(a, b, c).unwrap()
    }
}

/// Generates a line scene: 100 inliers sampled along the in-window segment
/// (uniformly for `Straight`, clustered around 10 random knots for
/// `Dashed`), zero-mean Gaussian noise of `sigma` on both coordinates, plus
/// `outlier_count` points uniform in the window. Pure function of its
/// arguments.
pub fn gen_line_scene(
    style: LineStyle,
    sigma: f64,
    outlier_count: usize,
    seed: u64,
) -> SyntheticLineScene {
    assert!(sigma >= 0.0 && sigma.is_finite());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let line = sample_window_line(&mut rng);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let mut points = Vec::with_capacity(LINE_INLIERS + outlier_count);

    let push_noisy = |rng: &mut ChaCha8Rng, t: f64, points: &mut Vec<DataPoint>| {
        let (x, y) = line.at(t);
        let (nx, ny) = if sigma > 0.0 {
            (noise.sample(rng), noise.sample(rng))
        } else {
            (0.0, 0.0)
        };
        points.push(DataPoint::point2(x + nx, y + ny));
    };

    match style {
        LineStyle::Straight => {
            for _ in 0..LINE_INLIERS {
                let t = rng.random_range(line.t_min..line.t_max);
                push_noisy(&mut rng, t, &mut points);
            }
        }
        LineStyle::Dashed => {
            for _ in 0..DASH_KNOTS {
                let knot = rng.random_range(line.t_min..line.t_max);
                for _ in 0..DASH_SAMPLES_PER_KNOT {
                    let t = knot + rng.random_range(-DASH_SPREAD..DASH_SPREAD);
                    push_noisy(&mut rng, t, &mut points);
                }
            }
        }
    }
    for _ in 0..outlier_count {
        points.push(DataPoint::point2(
            rng.random_range(0.0..WINDOW_SIZE),
            rng.random_range(0.0..WINDOW_SIZE),
        ));
    }
    let mut inlier_mask = vec![true; LINE_INLIERS];
    inlier_mask.resize(LINE_INLIERS + outlier_count, false);
    SyntheticLineScene {
        points,
        ground_truth: line.implicit(),
        inlier_mask,
        sigma,
        outlier_count,
        style,
    }
}

fn push_outlier_correspondences(rng: &mut ChaCha8Rng, count: usize, points: &mut Vec<DataPoint>) {
    for _ in 0..count {
        points.push(DataPoint::correspondence(
            rng.random_range(0.0..WINDOW_SIZE),
            rng.random_range(0.0..WINDOW_SIZE),
            rng.random_range(0.0..WINDOW_SIZE),
            rng.random_range(0.0..WINDOW_SIZE),
        ));
    }
}

fn mask_for(inliers: usize, outliers: usize) -> Vec<bool> {
    let mut mask = vec![true; inliers];
    mask.resize(inliers + outliers, false);
    mask
}

/// Affine scene: a well-conditioned random map, sources uniform in the
/// window.
pub fn gen_affine_scene(
    inliers: usize,
    outliers: usize,
    sigma: f64,
    seed: u64,
) -> CorrespondenceScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.random_range(-0.6..0.6f64);
    let sx = rng.random_range(0.7..1.3);
    let sy = rng.random_range(0.7..1.3);
    let shear = rng.random_range(-0.2..0.2);
    let tx = rng.random_range(-80.0..80.0);
    let ty = rng.random_range(-80.0..80.0);
    let a11 = sx * angle.cos();
    let a12 = sx * (shear * angle.cos() - angle.sin());
    let a21 = sy * angle.sin();
    let a22 = sy * (shear * angle.sin() + angle.cos());
    let truth = ModelParams::affine([a11, a12, tx, a21, a22, ty]).unwrap();
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let mut points = Vec::with_capacity(inliers + outliers);
    for _ in 0..inliers {
        let x = rng.random_range(0.0..WINDOW_SIZE);
        let y = rng.random_range(0.0..WINDOW_SIZE);
        let mut u = a11 * x + a12 * y + tx;
        let mut v = a21 * x + a22 * y + ty;
        if sigma > 0.0 {
            u += noise.sample(&mut rng);
            v += noise.sample(&mut rng);
        }
        points.push(DataPoint::correspondence(x, y, u, v));
    }
    push_outlier_correspondences(&mut rng, outliers, &mut points);
    CorrespondenceScene {
        points,
        ground_truth: truth,
        inlier_mask: mask_for(inliers, outliers),
    }
}

/// Homography scene: a similarity with a mild projective row, keeping the
/// homogeneous scale positive over the whole window.
pub fn gen_homography_scene(
    inliers: usize,
    outliers: usize,
    sigma: f64,
    seed: u64,
) -> CorrespondenceScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.random_range(-0.5..0.5f64);
    let scale = rng.random_range(0.8..1.25);
    let tx = rng.random_range(-80.0..80.0);
    let ty = rng.random_range(-80.0..80.0);
    let g1 = rng.random_range(-1e-4..1e-4);
    let g2 = rng.random_range(-1e-4..1e-4);
    let truth = ModelParams::homography([
        scale * angle.cos(),
        -scale * angle.sin(),
        tx,
        scale * angle.sin(),
        scale * angle.cos(),
        ty,
        g1,
        g2,
        1.0,
    ])
    .unwrap();
    let h = truth.as_matrix3().unwrap();
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let mut points = Vec::with_capacity(inliers + outliers);
    for _ in 0..inliers {
        let x = rng.random_range(0.0..WINDOW_SIZE);
        let y = rng.random_range(0.0..WINDOW_SIZE);
        let m = h * Vector3::new(x, y, 1.0);
        let mut u = m.x / m.z;
        let mut v = m.y / m.z;
        if sigma > 0.0 {
            u += noise.sample(&mut rng);
            v += noise.sample(&mut rng);
        }
        points.push(DataPoint::correspondence(x, y, u, v));
    }
    push_outlier_correspondences(&mut rng, outliers, &mut points);
    CorrespondenceScene {
        points,
        ground_truth: truth,
        inlier_mask: mask_for(inliers, outliers),
    }
}

/// Fundamental-matrix scene from a calibrated two-camera rig; the ground
/// truth is assembled from the pose as `K⁻ᵀ·[t]ₓ·R·K⁻¹`, and 3D points are
/// resampled until they project into the window of both views.
pub fn gen_fundamental_scene(
    inliers: usize,
    outliers: usize,
    sigma: f64,
    seed: u64,
) -> CorrespondenceScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let focal = rng.random_range(500.0..700.0);
    let k = Matrix3::new(
        focal,
        0.0,
        WINDOW_SIZE / 2.0,
        0.0,
        focal,
        WINDOW_SIZE / 2.0,
        0.0,
        0.0,
        1.0,
    );
    let yaw = rng.random_range(0.05..0.2f64);
    let pitch = rng.random_range(-0.05..0.05f64);
    let r_yaw = Matrix3::new(
        yaw.cos(),
        0.0,
        yaw.sin(),
        0.0,
        1.0,
        0.0,
        -yaw.sin(),
        0.0,
        yaw.cos(),
    );
    let r_pitch = Matrix3::new(
        1.0,
        0.0,
        0.0,
        0.0,
        pitch.cos(),
        -pitch.sin(),
        0.0,
        pitch.sin(),
        pitch.cos(),
    );
    let r = r_pitch * r_yaw;
    let t = Vector3::new(
        rng.random_range(60.0..150.0),
        rng.random_range(-20.0..20.0),
        rng.random_range(-15.0..15.0),
    );
    let t_cross = Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0);
    let k_inv = k.try_inverse().unwrap();
    let f = k_inv.transpose() * t_cross * r * k_inv;
    let mut entries = [0.0; 9];
    entries.copy_from_slice(f.transpose().as_slice());
    let truth = ModelParams::fundamental(entries).unwrap();

    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let in_window = |p: &Vector3<f64>| {
        p.z > 1e-9 && {
            let x = p.x / p.z;
            let y = p.y / p.z;
            (0.0..WINDOW_SIZE).contains(&x) && (0.0..WINDOW_SIZE).contains(&y)
        }
    };
    let mut points = Vec::with_capacity(inliers + outliers);
    while points.len() < inliers {
        let world = Vector3::new(
            rng.random_range(-400.0..400.0),
            rng.random_range(-300.0..300.0),
            rng.random_range(500.0..1500.0),
        );
        let cam2 = r * world + t;
        if cam2.z <= 1e-9 {
            continue;
        }
        let p1 = k * world;
        let p2 = k * cam2;
        if !in_window(&p1) || !in_window(&p2) {
            continue;
        }
        let mut c = [p1.x / p1.z, p1.y / p1.z, p2.x / p2.z, p2.y / p2.z];
        if sigma > 0.0 {
            for v in c.iter_mut() {
                *v += noise.sample(&mut rng);
            }
        }
        points.push(DataPoint::correspondence(c[0], c[1], c[2], c[3]));
    }
    push_outlier_correspondences(&mut rng, outliers, &mut points);
    CorrespondenceScene {
        points,
        ground_truth: truth,
        inlier_mask: mask_for(inliers, outliers),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::residual;

    #[test]
    fn noiseless_scene_sits_on_the_line() {
        let scene = gen_line_scene(LineStyle::Straight, 0.0, 0, 3);
        assert_eq!(scene.points.len(), 100);
        for p in &scene.points {
            let r = residual(&scene.ground_truth, p).unwrap();
            assert!(r < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn outliers_extend_the_scene_and_mask() {
        let scene = gen_line_scene(LineStyle::Straight, 1.0, 1000, 4);
        assert_eq!(scene.points.len(), 1100);
        assert_eq!(scene.inlier_mask.iter().filter(|&&b| b).count(), 100);
        assert_eq!(scene.inlier_mask.len(), 1100);
    }

    #[test]
    fn noise_standard_deviation_matches_sigma() {
        // Signed residual of a noisy inlier is N(0, σ): pool 1000 inliers.
        let mut pooled = Vec::new();
        for seed in 0..10 {
            let scene = gen_line_scene(LineStyle::Straight, 2.0, 0, 100 + seed);
            let theta = scene.ground_truth.theta();
            for p in &scene.points {
                let (x, y) = p.xy().unwrap();
                pooled.push(theta[0] * x + theta[1] * y + theta[2]);
            }
        }
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!(
            (1.7..2.3).contains(&std),
            "pooled residual std {std} outside [1.7, 2.3]"
        );
    }

    #[test]
    fn dashed_scene_has_ten_knots_of_ten() {
        let scene = gen_line_scene(LineStyle::Dashed, 0.0, 50, 8);
        assert_eq!(scene.points.len(), 150);
        assert_eq!(scene.inlier_mask.iter().filter(|&&b| b).count(), 100);
        for p in &scene.points[..100] {
            let r = residual(&scene.ground_truth, p).unwrap();
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn scenes_are_pure_functions_of_their_arguments() {
        let a = gen_line_scene(LineStyle::Dashed, 3.0, 200, 12);
        let b = gen_line_scene(LineStyle::Dashed, 3.0, 200, 12);
        assert_eq!(a.points, b.points);
        assert_eq!(a.ground_truth.theta(), b.ground_truth.theta());
        let c = gen_line_scene(LineStyle::Dashed, 3.0, 200, 13);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn correspondence_scenes_are_exact_when_noiseless() {
        for seed in 0..5 {
            let affine = gen_affine_scene(60, 30, 0.0, seed);
            let homography = gen_homography_scene(60, 30, 0.0, seed);
            let fundamental = gen_fundamental_scene(60, 30, 0.0, seed);
            for scene in [&affine, &homography, &fundamental] {
                assert_eq!(scene.points.len(), 90);
                for (p, &is_inlier) in scene.points.iter().zip(&scene.inlier_mask) {
                    if is_inlier {
                        let r = residual(&scene.ground_truth, p).unwrap();
                        assert!(r < 1e-9, "residual {r} (seed {seed})");
                    }
                }
            }
        }
    }
}
