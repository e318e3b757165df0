//! Minimal and least-squares solvers for every [`ModelKind`]: exact 2-point
//! lines, 3-point affine maps, normalized-DLT homographies, and the 7-point /
//! normalized 8-point fundamental-matrix solvers, plus the oriented epipolar
//! admissibility test.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{DataPoint, ModelKind, ModelParams};

/// Relative eigenvalue floor realizing the condition-number cap on design
/// matrices: systems whose solution subspace is not cleanly separated are
/// rejected instead of solved.
const RANK_EIG_TOL: f64 = 1e-13;

/// Imaginary-part tolerance for accepting near-real cubic roots.
const ROOT_IMAG_TOL: f64 = 1e-10;

/// A correspondence as two image points.
type PointPair = ((f64, f64), (f64, f64));

/// A normalization transform paired with the transformed points.
pub type Normalized = (Matrix3<f64>, Vec<(f64, f64)>);

/// Indices of a minimal sample; distinct, in range, exactly `m` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalSample {
    indices: Vec<usize>,
}

impl MinimalSample {
    pub fn new(indices: Vec<usize>, point_count: usize, m: usize) -> Result<Self> {
        if indices.len() != m {
            return Err(Error::InvalidInput(format!(
                "minimal sample needs {m} indices, got {}",
                indices.len()
            )));
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != indices.len() {
            return Err(Error::InvalidInput(
                "sample indices must be distinct".into(),
            ));
        }
        if indices.iter().any(|&i| i >= point_count) {
            return Err(Error::InvalidInput("sample index out of range".into()));
        }
        Ok(MinimalSample { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }
}

/// Models produced by one solver call: zero to three (the 7-point solver
/// returns one model per real root of its cubic).
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub models: Vec<ModelParams>,
}

fn check_points(kind: ModelKind, points: &[DataPoint]) -> Result<()> {
    let dim = kind.point_dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "kind `{kind}` expects {dim}-dimensional points, got {}",
                p.dim()
            )));
        }
        if !p.is_finite() {
            return Err(Error::InvalidInput("points must be finite".into()));
        }
    }
    Ok(())
}

fn pairs_of(points: &[DataPoint]) -> Vec<PointPair> {
    points.iter().map(|p| p.pair().unwrap()).collect()
}

/// Fits a model to exactly `m` points.
pub fn fit_minimal(kind: ModelKind, points: &[DataPoint]) -> Result<SolverResult> {
    let m = kind.min_sample_size();
    if points.len() != m {
        return Err(Error::InvalidInput(format!(
            "kind `{kind}` needs exactly {m} points, got {}",
            points.len()
        )));
    }
    check_points(kind, points)?;
    let models = match kind {
        ModelKind::Line2D => vec![line_through(points[0], points[1])?],
        ModelKind::Affine2D => vec![affine_minimal(&pairs_of(points))?],
        ModelKind::Homography => vec![homography_minimal(&pairs_of(points))?],
        ModelKind::Fundamental => fundamental_seven_point(&pairs_of(points))?,
    };
    Ok(SolverResult { models })
}

/// Least-squares fit over `points.len() ≥ m` points, optionally weighted.
/// `None` weights and all-ones weights take the same code path and give
/// bit-identical results.
pub fn fit_lsq(
    kind: ModelKind,
    points: &[DataPoint],
    weights: Option<&[f64]>,
) -> Result<SolverResult> {
    let m = kind.min_sample_size();
    if points.len() < m {
        return Err(Error::InsufficientData {
            needed: m,
            got: points.len(),
        });
    }
    check_points(kind, points)?;
    let ones;
    let w = match weights {
        Some(w) => {
            if w.len() != points.len() {
                return Err(Error::InvalidInput(
                    "weights length must match point count".into(),
                ));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInput(
                    "weights must be finite and non-negative".into(),
                ));
            }
            w
        }
        None => {
            ones = vec![1.0; points.len()];
            &ones
        }
    };
    if w.iter().filter(|&&v| v > 0.0).count() < m {
        return Err(Error::InsufficientData {
            needed: m,
            got: w.iter().filter(|&&v| v > 0.0).count(),
        });
    }
    let model = match kind {
        ModelKind::Line2D => line_total_least_squares(points, w)?,
        ModelKind::Affine2D => affine_least_squares(&pairs_of(points), w)?,
        ModelKind::Homography => homography_dlt(&pairs_of(points), w)?,
        ModelKind::Fundamental => fundamental_eight_point(&pairs_of(points), w)?,
    };
    Ok(SolverResult {
        models: vec![model],
    })
}

// ---------------------------------------------------------------------------
// Lines

fn line_through(p1: DataPoint, p2: DataPoint) -> Result<ModelParams> {
    let (x1, y1) = p1.xy().unwrap();
    let (x2, y2) = p2.xy().unwrap();
    let dx = x2 - x1;
    let dy = y2 - y1;
    if dx.hypot(dy) < 1e-9 {
        return Err(Error::DegenerateSample);
    }
    // Normal perpendicular to the direction.
    let a = dy;
    let b = -dx;
    let c = -(a * x1 + b * y1);
    ModelParams::line(a, b, c)
}

/// Total least squares: the normal is the small-eigenvalue eigenvector of the
/// weighted centered scatter matrix.
fn line_total_least_squares(points: &[DataPoint], weights: &[f64]) -> Result<ModelParams> {
    let mut wsum = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let (x, y) = p.xy().unwrap();
        wsum += w;
        cx += w * x;
        cy += w * y;
    }
    if wsum <= 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 0 });
    }
    cx /= wsum;
    cy /= wsum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let (x, y) = p.xy().unwrap();
        let dx = x - cx;
        let dy = y - cy;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx + syy < 1e-18 {
        return Err(Error::DegenerateSample);
    }
    // Closed-form eigenvector of the smallest eigenvalue of [sxx sxy; sxy syy].
    let trace = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (trace * trace / 4.0 - det).max(0.0).sqrt();
    let lambda_min = trace / 2.0 - disc;
    let (a, b) = if sxy.abs() > 1e-300 {
        (lambda_min - syy, sxy)
    } else if sxx <= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let c = -(a * cx + b * cy);
    ModelParams::line(a, b, c)
}

// ---------------------------------------------------------------------------
// Affine maps

fn affine_minimal(pairs: &[PointPair]) -> Result<ModelParams> {
    let m = Matrix3::new(
        pairs[0].0 .0,
        pairs[0].0 .1,
        1.0,
        pairs[1].0 .0,
        pairs[1].0 .1,
        1.0,
        pairs[2].0 .0,
        pairs[2].0 .1,
        1.0,
    );
    let svd = m.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv[2] <= sv[0] * 1e-12 {
        return Err(Error::DegenerateSample);
    }
    let bx = Vector3::new(pairs[0].1 .0, pairs[1].1 .0, pairs[2].1 .0);
    let by = Vector3::new(pairs[0].1 .1, pairs[1].1 .1, pairs[2].1 .1);
    let row1 = svd.solve(&bx, 0.0).map_err(|_| Error::DegenerateSample)?;
    let row2 = svd.solve(&by, 0.0).map_err(|_| Error::DegenerateSample)?;
    ModelParams::affine([row1.x, row1.y, row1.z, row2.x, row2.y, row2.z])
}

fn affine_least_squares(pairs: &[PointPair], weights: &[f64]) -> Result<ModelParams> {
    // Center and scale the source side for conditioning.
    let mut wsum = 0.0;
    let mut c1 = (0.0, 0.0);
    let mut c2 = (0.0, 0.0);
    for (&((x1, y1), (x2, y2)), &w) in pairs.iter().zip(weights) {
        wsum += w;
        c1.0 += w * x1;
        c1.1 += w * y1;
        c2.0 += w * x2;
        c2.1 += w * y2;
    }
    c1.0 /= wsum;
    c1.1 /= wsum;
    c2.0 /= wsum;
    c2.1 /= wsum;
    let mut spread = 0.0;
    for (&((x1, y1), _), &w) in pairs.iter().zip(weights) {
        spread += w * ((x1 - c1.0).hypot(y1 - c1.1));
    }
    spread /= wsum;
    if spread < 1e-12 {
        return Err(Error::DegenerateSample);
    }
    let s = 1.0 / spread;

    let mut normal = SMatrix::<f64, 3, 3>::zeros();
    let mut rhs_x = SVector::<f64, 3>::zeros();
    let mut rhs_y = SVector::<f64, 3>::zeros();
    for (&((x1, y1), (x2, y2)), &w) in pairs.iter().zip(weights) {
        let r = SVector::<f64, 3>::new((x1 - c1.0) * s, (y1 - c1.1) * s, 1.0);
        normal += w * r * r.transpose();
        rhs_x += w * (x2 - c2.0) * r;
        rhs_y += w * (y2 - c2.1) * r;
    }
    let eig = nalgebra::SymmetricEigen::new(normal);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[2] <= ev[0] * RANK_EIG_TOL {
        return Err(Error::DegenerateSample);
    }
    let solve = |rhs: &SVector<f64, 3>| -> SVector<f64, 3> {
        let mut x = SVector::<f64, 3>::zeros();
        for i in 0..3 {
            let v = eig.eigenvectors.column(i);
            x += v.dot(rhs) / eig.eigenvalues[i] * v;
        }
        x
    };
    let u = solve(&rhs_x);
    let v = solve(&rhs_y);
    // Undo the normalization: A = B·s, t = c2 + t' − A·c1.
    let a11 = u.x * s;
    let a12 = u.y * s;
    let a21 = v.x * s;
    let a22 = v.y * s;
    let tx = c2.0 + u.z - (a11 * c1.0 + a12 * c1.1);
    let ty = c2.1 + v.z - (a21 * c1.0 + a22 * c1.1);
    ModelParams::affine([a11, a12, tx, a21, a22, ty])
}

// ---------------------------------------------------------------------------
// Hartley normalization

/// Similarity transform placing the centroid at the origin with mean distance
/// √2, returned along with the transformed points.
pub fn hartley_normalize(points: &[(f64, f64)]) -> Result<Normalized> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| (p.0 - cx).hypot(p.1 - cy))
        .sum::<f64>()
        / n;
    if mean_dist < 1e-12 {
        return Err(Error::DegenerateSample);
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    let transform = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let normalized = points
        .iter()
        .map(|p| ((p.0 - cx) * s, (p.1 - cy) * s))
        .collect();
    Ok((transform, normalized))
}

// ---------------------------------------------------------------------------
// Homographies

fn collinear_triple_exists(points: &[(f64, f64)]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let (ax, ay) = points[i];
                let (bx, by) = points[j];
                let (cx, cy) = points[k];
                let ab = (bx - ax, by - ay);
                let ac = (cx - ax, cy - ay);
                let cross = ab.0 * ac.1 - ab.1 * ac.0;
                let scale = ab.0.hypot(ab.1) * ac.0.hypot(ac.1);
                if cross.abs() <= 1e-9 * scale.max(1e-12) {
                    return true;
                }
            }
        }
    }
    false
}

/// Accumulates AᵀA for the DLT system and returns eigenpairs sorted by
/// ascending eigenvalue.
struct NullSpace {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<SVector<f64, 9>>,
}

fn null_space_of(ata: SMatrix<f64, 9, 9>) -> NullSpace {
    let eig = nalgebra::SymmetricEigen::new(ata);
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    NullSpace {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect(),
    }
}

fn homography_minimal(pairs: &[PointPair]) -> Result<ModelParams> {
    let src: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    if collinear_triple_exists(&src) || collinear_triple_exists(&dst) {
        return Err(Error::DegenerateSample);
    }
    homography_dlt(pairs, &[1.0; 4])
}

fn homography_dlt(pairs: &[PointPair], weights: &[f64]) -> Result<ModelParams> {
    let src: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let (t1, src_n) = hartley_normalize(&src)?;
    let (t2, dst_n) = hartley_normalize(&dst)?;

    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (i, (&(x, y), &(u, v))) in src_n.iter().zip(&dst_n).enumerate() {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let r1 = SVector::<f64, 9>::from_row_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
        let r2 = SVector::<f64, 9>::from_row_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u]);
        ata += w * (r1 * r1.transpose() + r2 * r2.transpose());
    }
    let ns = null_space_of(ata);
    if ns.eigenvalues[1] <= ns.eigenvalues[8].max(1e-300) * RANK_EIG_TOL {
        return Err(Error::DegenerateSample);
    }
    let h = ns.eigenvectors[0];
    let h_hat = Matrix3::from_row_slice(h.as_slice());
    let t2_inv = t2.try_inverse().ok_or(Error::DegenerateSample)?;
    let h_full = t2_inv * h_hat * t1;
    let mut entries = [0.0; 9];
    entries.copy_from_slice(h_full.transpose().as_slice());
    ModelParams::homography(entries)
}

// ---------------------------------------------------------------------------
// Fundamental matrices

fn epipolar_row(x: f64, y: f64, u: f64, v: f64) -> SVector<f64, 9> {
    // Coefficients of x2ᵀ F x1 = 0 for row-major F, with x1 = (x, y, 1) and
    // x2 = (u, v, 1).
    SVector::<f64, 9>::from_row_slice(&[u * x, u * y, u, v * x, v * y, v, x, y, 1.0])
}

fn rank2_project(f: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = f.svd(true, true);
    let u = svd.u.ok_or(Error::DegenerateSample)?;
    let v_t = svd.v_t.ok_or(Error::DegenerateSample)?;
    let mut sv = svd.singular_values;
    // nalgebra returns singular values in descending order for 3×3.
    sv[2] = 0.0;
    Ok(u * Matrix3::from_diagonal(&sv) * v_t)
}

fn to_row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut entries = [0.0; 9];
    entries.copy_from_slice(m.transpose().as_slice());
    entries
}

fn fundamental_seven_point(pairs: &[PointPair]) -> Result<Vec<ModelParams>> {
    let src: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let (t1, src_n) = hartley_normalize(&src)?;
    let (t2, dst_n) = hartley_normalize(&dst)?;

    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (&(x, y), &(u, v)) in src_n.iter().zip(&dst_n) {
        let r = epipolar_row(x, y, u, v);
        ata += r * r.transpose();
    }
    let ns = null_space_of(ata);
    // Two legitimate null directions; a third means the 7×9 system is
    // rank-deficient.
    if ns.eigenvalues[2] <= ns.eigenvalues[8].max(1e-300) * RANK_EIG_TOL {
        return Err(Error::DegenerateSample);
    }
    let f1 = Matrix3::from_row_slice(ns.eigenvectors[0].as_slice());
    let f2 = Matrix3::from_row_slice(ns.eigenvectors[1].as_slice());

    // det(F1 + t·F2) = 0, expanded by multilinearity over columns.
    let a: Vec<Vector3<f64>> = (0..3).map(|c| f1.column(c).into_owned()).collect();
    let b: Vec<Vector3<f64>> = (0..3).map(|c| f2.column(c).into_owned()).collect();
    let det3 = |x: &Vector3<f64>, y: &Vector3<f64>, z: &Vector3<f64>| x.dot(&y.cross(z));
    let c0 = det3(&a[0], &a[1], &a[2]);
    let c1 = det3(&b[0], &a[1], &a[2]) + det3(&a[0], &b[1], &a[2]) + det3(&a[0], &a[1], &b[2]);
    let c2 = det3(&a[0], &b[1], &b[2]) + det3(&b[0], &a[1], &b[2]) + det3(&b[0], &b[1], &a[2]);
    let c3 = det3(&b[0], &b[1], &b[2]);

    let roots = solve_cubic(c3, c2, c1, c0);
    let mut models = Vec::new();
    for t in roots {
        let f_hat = f1 + t * f2;
        let f_rank2 = rank2_project(&f_hat)?;
        let f_full = t2.transpose() * f_rank2 * t1;
        // Denormalization preserves rank 2; re-project to absorb round-off.
        let f_final = rank2_project(&f_full)?;
        if let Ok(model) = ModelParams::fundamental(to_row_major(&f_final)) {
            models.push(model);
        }
    }
    Ok(models)
}

fn fundamental_eight_point(pairs: &[PointPair], weights: &[f64]) -> Result<ModelParams> {
    let src: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let (t1, src_n) = hartley_normalize(&src)?;
    let (t2, dst_n) = hartley_normalize(&dst)?;

    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (i, (&(x, y), &(u, v))) in src_n.iter().zip(&dst_n).enumerate() {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        let r = epipolar_row(x, y, u, v);
        ata += w * r * r.transpose();
    }
    let ns = null_space_of(ata);
    // With more than a minimal sample the null direction must be unique;
    // exactly seven usable points leave a 2-dof family, any member of which
    // attains zero residual.
    let usable = weights.iter().filter(|&&w| w > 0.0).count();
    if usable > 7 && ns.eigenvalues[1] <= ns.eigenvalues[8].max(1e-300) * RANK_EIG_TOL {
        return Err(Error::DegenerateSample);
    }
    let f_hat = Matrix3::from_row_slice(ns.eigenvectors[0].as_slice());
    let f_rank2 = rank2_project(&f_hat)?;
    let f_full = t2.transpose() * f_rank2 * t1;
    let f_final = rank2_project(&f_full)?;
    ModelParams::fundamental(to_row_major(&f_final))
}

/// Sign-consistency test on the epipolar geometry of a sample: for the
/// epipole e′ spanning the null space of Fᵀ, the lines e′ × x2ᵢ and F·x1ᵢ
/// must agree in orientation across all correspondences. Hypotheses that
/// imply points behind a camera fail it.
pub fn oriented_epipolar_check(model: &ModelParams, sample: &[DataPoint]) -> bool {
    debug_assert_eq!(model.kind(), ModelKind::Fundamental);
    let Some(f) = model.as_matrix3() else {
        return false;
    };
    if sample.is_empty() {
        return true;
    }
    let svd = f.svd(true, false);
    let Some(u) = svd.u else {
        return false;
    };
    let epipole = u.column(2).into_owned();
    let mut sign = 0.0;
    for point in sample {
        let Some(((x1, y1), (x2, y2))) = point.pair() else {
            return false;
        };
        let line_through_epipole = epipole.cross(&Vector3::new(x2, y2, 1.0));
        let epipolar_line = f * Vector3::new(x1, y1, 1.0);
        let s = line_through_epipole.dot(&epipolar_line);
        if !s.is_finite() || s == 0.0 {
            return false;
        }
        if sign == 0.0 {
            sign = s.signum();
        } else if s.signum() != sign {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Cubic roots

/// Real roots of `c3·t³ + c2·t² + c1·t + c0 = 0`, closed form
/// (trigonometric for three real roots, Cardano otherwise), with degree
/// fall-through for vanishing leading coefficients. Near-real complex pairs
/// within [`ROOT_IMAG_TOL`] are accepted; near-equal roots are merged.
fn solve_cubic(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let (c3, c2, c1, c0) = (c3 / scale, c2 / scale, c1 / scale, c0 / scale);
    let mut roots = if c3.abs() < 1e-12 {
        solve_quadratic(c2, c1, c0)
    } else {
        let a = c2 / c3;
        let b = c1 / c3;
        let c = c0 / c3;
        let shift = a / 3.0;
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let mut ys = Vec::new();
        if p.abs() < 1e-14 && q.abs() < 1e-14 {
            ys.push(0.0);
        } else {
            let discriminant = -4.0 * p * p * p - 27.0 * q * q;
            if discriminant >= 0.0 {
                // Three real roots; p < 0 is implied here.
                let m = 2.0 * (-p / 3.0).sqrt();
                let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
                let theta = arg.acos() / 3.0;
                for k in 0..3 {
                    ys.push(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
                }
            } else {
                let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
                let u = (-q / 2.0 + s).cbrt();
                let v = (-q / 2.0 - s).cbrt();
                ys.push(u + v);
                // The complex pair −(u+v)/2 ± i·(√3/2)(u−v).
                let imag = (3.0_f64.sqrt() / 2.0) * (u - v).abs();
                if imag <= ROOT_IMAG_TOL * (u.abs() + v.abs()).max(1.0) {
                    ys.push(-(u + v) / 2.0);
                }
            }
        }
        ys.into_iter().map(|y| y - shift).collect()
    };
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
    roots
}

fn solve_quadratic(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c2.abs() < 1e-12 {
        if c1.abs() < 1e-12 {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let tol = 1e-12 * (c1 * c1 + (4.0 * c2 * c0).abs()).max(1.0);
    if disc > tol {
        // Numerically stable split: q keeps the larger-magnitude sum.
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        vec![q / c2, c0 / q]
    } else if disc >= -tol {
        vec![-c1 / (2.0 * c2)]
    } else {
        Vec::new()
    }
}
