//! Ground-truth error metrics.

use crate::error::{Error, Result};
use crate::geometry::{residual, DataPoint, ModelParams};

/// Angle between two lines' normals, in degrees within [0, 90]; invariant
/// to either line's sign gauge.
///
/// Panics if either model is not a line.
pub fn angular_error(estimate: &ModelParams, truth: &ModelParams) -> f64 {
    let normal = |m: &ModelParams| match m {
        ModelParams::Line(v) => (v[0], v[1]),
        other => panic!("angular_error expects lines, got `{}`", other.kind()),
    };
    let (a1, b1) = normal(estimate);
    let (a2, b2) = normal(truth);
    let dot = (a1 * a2 + b1 * b2).abs().min(1.0);
    dot.acos().to_degrees()
}

/// Mean residual of `estimate` over the masked (ground-truth inlier)
/// points, in the estimate kind's residual units.
pub fn model_error(
    estimate: &ModelParams,
    points: &[DataPoint],
    inlier_mask: &[bool],
) -> Result<f64> {
    if inlier_mask.len() != points.len() {
        return Err(Error::InvalidInput(
            "inlier mask length must match point count".into(),
        ));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (point, &keep) in points.iter().zip(inlier_mask) {
        if keep {
            sum += residual(estimate, point)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput("empty inlier set".into()));
    }
    Ok(sum / count as f64)
}
