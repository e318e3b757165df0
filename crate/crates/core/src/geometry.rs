//! Shared data types, residual functions, the Gaussian residual kernel, and
//! the unary/pairwise/total labeling energies.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; the free functions are pure.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::neighborhood::NeighborhoodGraph;

/// Kernel values below this are clamped to zero so that graph capacities
/// stay well-scaled.
const KERNEL_FLOOR: f64 = 1e-12;

/// Relative bound on the smallest singular value of a fundamental matrix.
const RANK2_TOL: f64 = 1e-7;

/// An observation: a 2D point for line fitting, or a correspondence between
/// two images stored as concatenated 4D coordinates `(x1, y1, x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataPoint {
    Point2([f64; 2]),
    Point4([f64; 4]),
}

impl DataPoint {
    pub fn point2(x: f64, y: f64) -> Self {
        DataPoint::Point2([x, y])
    }

    pub fn correspondence(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        DataPoint::Point4([x1, y1, x2, y2])
    }

    pub fn dim(&self) -> usize {
        match self {
            DataPoint::Point2(_) => 2,
            DataPoint::Point4(_) => 4,
        }
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            DataPoint::Point2(c) => c,
            DataPoint::Point4(c) => c,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }

    /// The coordinates of a 2D point.
    pub fn xy(&self) -> Option<(f64, f64)> {
        match self {
            DataPoint::Point2([x, y]) => Some((*x, *y)),
            DataPoint::Point4(_) => None,
        }
    }

    /// The two matched image points of a correspondence.
    pub fn pair(&self) -> Option<((f64, f64), (f64, f64))> {
        match self {
            DataPoint::Point2(_) => None,
            DataPoint::Point4([x1, y1, x2, y2]) => Some(((*x1, *y1), (*x2, *y2))),
        }
    }
}

/// The geometric model families supported by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Line2D,
    Affine2D,
    Homography,
    Fundamental,
}

impl ModelKind {
    /// Size `m` of a minimal sample for this kind.
    pub fn min_sample_size(&self) -> usize {
        match self {
            ModelKind::Line2D => 2,
            ModelKind::Affine2D => 3,
            ModelKind::Homography => 4,
            ModelKind::Fundamental => 7,
        }
    }

    /// Dimensionality of the observations this kind is fit to.
    pub fn point_dim(&self) -> usize {
        match self {
            ModelKind::Line2D => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::Line2D => "line",
            ModelKind::Affine2D => "affine",
            ModelKind::Homography => "homography",
            ModelKind::Fundamental => "fundamental",
        };
        f.write_str(name)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(ModelKind::Line2D),
            "affine" => Ok(ModelKind::Affine2D),
            "homography" => Ok(ModelKind::Homography),
            "fundamental" => Ok(ModelKind::Fundamental),
            other => Err(Error::InvalidInput(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Parameters of a geometric model. Normalization is enforced at
/// construction:
///
/// * `Line`: implicit line `a·x + b·y + c = 0` with `a² + b² = 1`,
/// * `Affine`: row-major 2×3 map `[a11 a12 tx; a21 a22 ty]`,
/// * `Homography`: row-major 3×3 with unit Frobenius norm,
/// * `Fundamental`: row-major 3×3, unit Frobenius norm, rank 2.
///
/// The sign gauge is fixed so that the entry of largest magnitude (for
/// lines: among `a`, `b`) is positive; residuals are invariant to it.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Line([f64; 3]),
    Affine([f64; 6]),
    Homography([f64; 9]),
    Fundamental([f64; 9]),
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "model parameters must be finite".into(),
        ))
    }
}

/// Scales `values` to unit Euclidean norm and flips the sign so the entry of
/// largest magnitude is positive.
fn normalize_canonical(values: &mut [f64]) -> Result<()> {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::InvalidInput("model parameters are all zero".into()));
    }
    for v in values.iter_mut() {
        *v /= norm;
    }
    let lead = values
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if lead < 0.0 {
        for v in values.iter_mut() {
            *v = -*v;
        }
    }
    Ok(())
}

impl ModelParams {
    pub fn line(a: f64, b: f64, c: f64) -> Result<Self> {
        check_finite(&[a, b, c])?;
        let norm = (a * a + b * b).sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidInput("line normal is zero".into()));
        }
        let mut v = [a / norm, b / norm, c / norm];
        // Sign gauge keyed to the normal only: c may dominate.
        let lead = if v[0].abs() >= v[1].abs() { v[0] } else { v[1] };
        if lead < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        Ok(ModelParams::Line(v))
    }

    pub fn affine(entries: [f64; 6]) -> Result<Self> {
        check_finite(&entries)?;
        Ok(ModelParams::Affine(entries))
    }

    pub fn homography(entries: [f64; 9]) -> Result<Self> {
        check_finite(&entries)?;
        let mut v = entries;
        normalize_canonical(&mut v)?;
        Ok(ModelParams::Homography(v))
    }

    pub fn fundamental(entries: [f64; 9]) -> Result<Self> {
        check_finite(&entries)?;
        let mut v = entries;
        normalize_canonical(&mut v)?;
        let m = Matrix3::from_row_slice(&v);
        let svd = m.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        if sv[2] > RANK2_TOL * sv[0] {
            return Err(Error::InvalidInput(
                "fundamental matrix must have rank 2".into(),
            ));
        }
        Ok(ModelParams::Fundamental(v))
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Line(_) => ModelKind::Line2D,
            ModelParams::Affine(_) => ModelKind::Affine2D,
            ModelParams::Homography(_) => ModelKind::Homography,
            ModelParams::Fundamental(_) => ModelKind::Fundamental,
        }
    }

    /// The raw parameter vector θ.
    pub fn theta(&self) -> &[f64] {
        match self {
            ModelParams::Line(v) => v,
            ModelParams::Affine(v) => v,
            ModelParams::Homography(v) => v,
            ModelParams::Fundamental(v) => v,
        }
    }

    /// 3×3 matrix view for homographies and fundamental matrices.
    pub fn as_matrix3(&self) -> Option<Matrix3<f64>> {
        match self {
            ModelParams::Homography(v) | ModelParams::Fundamental(v) => {
                Some(Matrix3::from_row_slice(v))
            }
            _ => None,
        }
    }
}

/// Binary inlier/outlier assignment over a point set (`true` = inlier).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<bool>,
    inlier_count: usize,
}

impl Labeling {
    pub fn new(labels: Vec<bool>) -> Self {
        let inlier_count = labels.iter().filter(|&&l| l).count();
        Labeling {
            labels,
            inlier_count,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_inlier(&self, index: usize) -> bool {
        self.labels[index]
    }

    pub fn inlier_count(&self) -> usize {
        self.inlier_count
    }

    pub fn inlier_ratio(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.inlier_count as f64 / self.labels.len() as f64
        }
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn inlier_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| l.then_some(i))
            .collect()
    }
}

/// Tunable parameters of the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Residual threshold ε, in model-residual units.
    pub epsilon: f64,
    /// Neighborhood radius r, in pixels (4D joint coordinates for
    /// correspondences).
    pub radius: f64,
    /// Weight λ of the spatial-coherence term.
    pub lambda: f64,
    /// Threshold on the confidence ratio gating local optimization.
    pub eps_conf: f64,
    /// Desired success probability µ of the adaptive termination.
    pub confidence: f64,
    /// Hard cap on the number of main-loop iterations.
    pub max_iterations: usize,
    /// Seed for the sampling RNG.
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            epsilon: 0.31,
            radius: 20.0,
            lambda: 0.1,
            eps_conf: 10.0,
            confidence: 0.95,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput("lambda must be non-negative".into()));
        }
        if self.eps_conf.is_nan() || self.eps_conf < 1.0 {
            return Err(Error::InvalidInput("eps_conf must be ≥ 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidInput(
                "confidence must lie strictly between 0 and 1".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// A model hypothesis together with its labeling and support score.
#[derive(Debug, Clone)]
pub struct ScoredModel {
    pub model: ModelParams,
    pub labeling: Labeling,
    /// Kernel-sum support (or the inlier count for the top-hat baseline).
    pub support: f64,
    /// Main-loop iteration at which the originating sample was drawn.
    pub found_at_iteration: usize,
    /// Inlier ratio of the threshold labeling when the model was scored.
    pub found_inlier_ratio: f64,
}

/// Point-to-model residual φ.
///
/// * `Line2D`: |a·x + b·y + c| (the normal is unit, so this is the
///   point-line distance),
/// * `Affine2D`: ‖A·p1 + t − p2‖,
/// * `Homography`: symmetric transfer error, the average of the forward and
///   backward transfer distances,
/// * `Fundamental`: Sampson distance.
pub fn residual(model: &ModelParams, point: &DataPoint) -> Result<f64> {
    let expected = model.kind().point_dim();
    if point.dim() != expected {
        return Err(Error::InvalidInput(format!(
            "point dimension {} does not match model kind `{}` (expects {})",
            point.dim(),
            model.kind(),
            expected
        )));
    }
    match model {
        ModelParams::Line([a, b, c]) => {
            let (x, y) = point.xy().unwrap();
            Ok((a * x + b * y + c).abs())
        }
        ModelParams::Affine([a11, a12, tx, a21, a22, ty]) => {
            let ((x1, y1), (x2, y2)) = point.pair().unwrap();
            let dx = a11 * x1 + a12 * y1 + tx - x2;
            let dy = a21 * x1 + a22 * y1 + ty - y2;
            Ok(dx.hypot(dy))
        }
        ModelParams::Homography(_) => {
            let h = model.as_matrix3().unwrap();
            if h.determinant().abs() < 1e-12 {
                return Err(Error::SingularModel);
            }
            let h_inv = h.try_inverse().ok_or(Error::SingularModel)?;
            let ((x1, y1), (x2, y2)) = point.pair().unwrap();
            let fwd = transfer_distance(&h, x1, y1, x2, y2);
            let bwd = transfer_distance(&h_inv, x2, y2, x1, y1);
            Ok(0.5 * (fwd + bwd))
        }
        ModelParams::Fundamental(_) => {
            let f = model.as_matrix3().unwrap();
            let ((x1, y1), (x2, y2)) = point.pair().unwrap();
            Ok(sampson_distance(&f, x1, y1, x2, y2))
        }
    }
}

/// Distance between `h`-mapped `(x, y)` and the target `(tx, ty)`.
fn transfer_distance(h: &Matrix3<f64>, x: f64, y: f64, tx: f64, ty: f64) -> f64 {
    let v = h * Vector3::new(x, y, 1.0);
    if v.z.abs() < 1e-300 {
        return f64::INFINITY;
    }
    (v.x / v.z - tx).hypot(v.y / v.z - ty)
}

fn sampson_distance(f: &Matrix3<f64>, x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    let p1 = Vector3::new(x1, y1, 1.0);
    let p2 = Vector3::new(x2, y2, 1.0);
    let fp1 = f * p1;
    let ftp2 = f.transpose() * p2;
    let num = p2.dot(&fp1).abs();
    let den = (fp1.x * fp1.x + fp1.y * fp1.y + ftp2.x * ftp2.x + ftp2.y * ftp2.y).sqrt();
    if den < 1e-300 {
        // Both points sit on the epipoles; the constraint is vacuous there.
        if num < 1e-300 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Gaussian residual kernel `K(δ, ε) = exp(−δ² / (2ε²))`, clamped to zero
/// below `1e-12`.
pub fn kernel(delta: f64, epsilon: f64) -> f64 {
    debug_assert!(epsilon > 0.0);
    let k = (-delta * delta / (2.0 * epsilon * epsilon)).exp();
    if k < KERNEL_FLOOR {
        0.0
    } else {
        k
    }
}

/// Unary labeling cost: `1 − K` for an inlier label, `K` for an outlier
/// label.
pub fn unary_cost(label: bool, delta: f64, epsilon: f64) -> f64 {
    let k = kernel(delta, epsilon);
    if label {
        1.0 - k
    } else {
        k
    }
}

/// Pairwise labeling cost for a neighbor pair with kernel values `kp`, `kq`:
/// disagreeing labels cost 1, agreeing outliers cost `(kp + kq)/2`, agreeing
/// inliers cost `1 − (kp + kq)/2`.
pub fn pairwise_cost(label_p: bool, label_q: bool, kp: f64, kq: f64) -> f64 {
    if label_p != label_q {
        1.0
    } else if !label_p {
        0.5 * (kp + kq)
    } else {
        1.0 - 0.5 * (kp + kq)
    }
}

/// Kernel-sum support of a model over a point set, together with the
/// threshold labeling (inlier iff residual < ε).
pub fn support(model: &ModelParams, points: &[DataPoint], epsilon: f64) -> Result<(f64, Labeling)> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    let mut sum = 0.0;
    let mut labels = Vec::with_capacity(points.len());
    for point in points {
        let delta = residual(model, point)?;
        sum += kernel(delta, epsilon);
        labels.push(delta < epsilon);
    }
    Ok((sum, Labeling::new(labels)))
}

/// Total labeling energy `E = E_K + λ·E_S` of a labeling under a model; the
/// reference evaluation that the min-cut construction is checked against.
pub fn total_energy(
    points: &[DataPoint],
    labeling: &Labeling,
    model: &ModelParams,
    neighborhood: &NeighborhoodGraph,
    settings: &Settings,
) -> Result<f64> {
    if labeling.len() != points.len() || neighborhood.node_count() != points.len() {
        return Err(Error::InvalidInput(format!(
            "size mismatch: {} points, labeling of {}, neighborhood over {}",
            points.len(),
            labeling.len(),
            neighborhood.node_count()
        )));
    }
    let mut kernels = Vec::with_capacity(points.len());
    let mut energy = 0.0;
    for (i, point) in points.iter().enumerate() {
        let delta = residual(model, point)?;
        let k = kernel(delta, settings.epsilon);
        kernels.push(k);
        energy += if labeling.is_inlier(i) { 1.0 - k } else { k };
    }
    for &(p, q) in neighborhood.edges() {
        energy += settings.lambda
            * pairwise_cost(
                labeling.is_inlier(p),
                labeling.is_inlier(q),
                kernels[p],
                kernels[q],
            );
    }
    Ok(energy)
}
