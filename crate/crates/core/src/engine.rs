//! The full estimation loop: uniform minimal sampling, kernel-sum support,
//! adaptive termination, confidence-gated graph-cut local optimization, and
//! a final least-squares polish on the winning labeling.
//!
//! One run is strictly sequential; independent runs may execute
//! concurrently.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{fit_lsq, fit_minimal, oriented_epipolar_check, MinimalSample};
use crate::geometry::{
    kernel, residual, support, DataPoint, Labeling, ModelKind, ModelParams, ScoredModel, Settings,
};
use crate::maxflow::EnergyGraph;
use crate::neighborhood::{build_neighborhood, NeighborhoodGraph};

/// Safety cap on alternation steps inside one local optimization; support
/// must strictly improve every step, so this is never reached in practice.
const LO_MAX_STEPS: usize = 100;

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Gaussian-kernel support with graph-cut local optimization.
    GraphCut,
    /// Top-hat support (inlier counting), no local optimization: the
    /// classic uniform-sampling baseline with a least-squares polish.
    PlainRansac,
}

/// One main-loop iteration as it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub iteration: usize,
    /// Indices of the drawn minimal sample.
    pub indices: Vec<usize>,
    /// Support of the best hypothesis this sample produced (0 when the
    /// sample was degenerate or every root was discarded).
    pub support: f64,
    pub was_best: bool,
    /// Whether the sample contained only ground-truth inliers; filled by
    /// [`RunReport::annotate_all_inlier`], `None` until then.
    pub all_inlier: Option<bool>,
}

/// Counters carried by a failed run.
#[derive(Debug, Clone)]
pub struct RunDiagnostics {
    pub samples_drawn: usize,
    pub lo_runs: usize,
    pub gc_runs: usize,
    pub samples: Vec<SampleRecord>,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub best: ScoredModel,
    pub samples_drawn: usize,
    pub lo_runs: usize,
    pub gc_runs: usize,
    pub wall_time: Duration,
    pub samples: Vec<SampleRecord>,
    /// The minimal sample whose hypothesis (possibly after local
    /// optimization and the final polish) won the run.
    pub winning_sample: Vec<usize>,
}

impl RunReport {
    /// Fills every record's `all_inlier` flag from a per-point ground-truth
    /// predicate.
    pub fn annotate_all_inlier(&mut self, is_inlier: impl Fn(usize) -> bool) {
        for record in &mut self.samples {
            record.all_inlier = Some(record.indices.iter().all(|&i| is_inlier(i)));
        }
    }
}

/// Result of one local-optimization invocation.
#[derive(Debug, Clone)]
pub struct LocalOptResult {
    pub best: ScoredModel,
    /// Graph cuts performed during this invocation (≥ 1).
    pub gc_runs: usize,
}

/// Iterations needed to reach `confidence` of drawing one all-inlier
/// minimal sample, clamped to `[1, max_iterations]`.
///
/// `P_I = C(inliers, m) / C(total, m)` is evaluated as a falling-factorial
/// product; `P_I = 0` maps to the cap, near-certainty to 1.
pub fn required_iterations(
    inlier_count: usize,
    total: usize,
    m: usize,
    confidence: f64,
    max_iterations: usize,
) -> usize {
    debug_assert!(inlier_count <= total && m <= total);
    debug_assert!(confidence > 0.0 && confidence < 1.0);
    if inlier_count < m {
        return max_iterations;
    }
    let mut p_inlier_sample = 1.0f64;
    for i in 0..m {
        p_inlier_sample *= (inlier_count - i) as f64 / (total - i) as f64;
    }
    if p_inlier_sample >= 1.0 - 1e-12 {
        return 1;
    }
    if p_inlier_sample <= 0.0 {
        return max_iterations;
    }
    let needed = ((1.0 - confidence).ln() / (1.0 - p_inlier_sample).ln()).ceil();
    if !needed.is_finite() || needed >= max_iterations as f64 {
        max_iterations
    } else {
        (needed as usize).max(1)
    }
}

/// Draws `m` distinct indices uniformly without replacement.
pub fn draw_minimal_sample(
    rng: &mut impl Rng,
    point_count: usize,
    m: usize,
) -> Result<MinimalSample> {
    if point_count < m {
        return Err(Error::InsufficientData {
            needed: m,
            got: point_count,
        });
    }
    let indices = rand::seq::index::sample(rng, point_count, m).into_vec();
    MinimalSample::new(indices, point_count, m)
}

/// Confidence of having hit an all-inlier sample by iteration `k` at inlier
/// ratio `eta`.
fn confidence_by(k: usize, eta: f64, m: usize) -> f64 {
    let p = eta.powi(m as i32);
    1.0 - (1.0 - p).powi(k as i32)
}

/// Gate for running local optimization on a new so-far-the-best model:
/// fires when the confidence ratio µ(k2, η2)/µ(k1, η1) exceeds `eps_conf`.
/// A zero µ1 (in particular η1 = 0, the state before any best exists)
/// always fires.
pub fn lo_trigger(k1: usize, eta1: f64, k2: usize, eta2: f64, m: usize, eps_conf: f64) -> bool {
    let mu1 = confidence_by(k1, eta1, m);
    if mu1 <= 0.0 {
        return true;
    }
    let mu2 = confidence_by(k2, eta2, m);
    mu2 / mu1 > eps_conf
}

/// Encodes `E_K + λ·E_S` for one model over the neighborhood graph.
///
/// Per point the unary term is `(c0, c1) = (K_p, 1 − K_p)`; per edge the
/// pairwise term is `λ·((K_p + K_q)/2, 1, 1, 1 − (K_p + K_q)/2)`, which is
/// submodular by construction.
pub fn build_problem_graph(
    points: &[DataPoint],
    model: &ModelParams,
    neighborhood: &NeighborhoodGraph,
    settings: &Settings,
) -> Result<EnergyGraph> {
    if neighborhood.node_count() != points.len() {
        return Err(Error::InvalidInput(format!(
            "neighborhood over {} nodes does not match {} points",
            neighborhood.node_count(),
            points.len()
        )));
    }
    let mut kernels = Vec::with_capacity(points.len());
    for point in points {
        kernels.push(kernel(residual(model, point)?, settings.epsilon));
    }
    let mut graph = EnergyGraph::new(points.len());
    for (p, &k) in kernels.iter().enumerate() {
        graph.add_term1(p, k, 1.0 - k);
    }
    if settings.lambda > 0.0 {
        for &(p, q) in neighborhood.edges() {
            let avg = 0.5 * (kernels[p] + kernels[q]);
            graph.add_term2(
                p,
                q,
                settings.lambda * avg,
                settings.lambda,
                settings.lambda,
                settings.lambda * (1.0 - avg),
            )?;
        }
    }
    Ok(graph)
}

/// Alternates graph-cut labeling and least-squares refitting on a random
/// `min(7m, |inliers|)`-sized inlier subset until the kernel-sum support
/// stops improving. Never returns lower support than its input; the output
/// labeling is the energy-optimal labeling of the output model.
pub fn local_optimize(
    points: &[DataPoint],
    neighborhood: &NeighborhoodGraph,
    best: &ScoredModel,
    settings: &Settings,
    rng: &mut impl Rng,
) -> Result<LocalOptResult> {
    let kind = best.model.kind();
    let m = kind.min_sample_size();
    let mut current = best.clone();
    let mut gc_runs = 0;
    for _ in 0..LO_MAX_STEPS {
        let graph = build_problem_graph(points, &current.model, neighborhood, settings)?;
        let cut = graph.min_cut();
        gc_runs += 1;
        let inlier_indices = cut.labeling.inlier_indices();
        if inlier_indices.len() < m {
            if gc_runs == 1 {
                return Ok(LocalOptResult {
                    best: best.clone(),
                    gc_runs,
                });
            }
            break;
        }
        current.labeling = cut.labeling;
        let subset_size = (7 * m).min(inlier_indices.len());
        let picks = rand::seq::index::sample(rng, inlier_indices.len(), subset_size);
        let subset: Vec<DataPoint> = picks.iter().map(|i| points[inlier_indices[i]]).collect();
        let refit = match fit_lsq(kind, &subset, None) {
            Ok(result) => result,
            Err(_) => break,
        };
        let Some(model) = refit.models.into_iter().next() else {
            break;
        };
        let (w, threshold_labeling) = match support(&model, points, settings.epsilon) {
            Ok(scored) => scored,
            Err(Error::SingularModel) => break,
            Err(err) => return Err(err),
        };
        if w > current.support {
            current.model = model;
            current.support = w;
            current.found_inlier_ratio = threshold_labeling.inlier_ratio();
            // The labeling is refreshed by the cut at the top of the next
            // pass, keeping it optimal for the model it is stored with.
        } else {
            break;
        }
    }
    Ok(LocalOptResult {
        best: current,
        gc_runs,
    })
}

fn top_hat_support(
    model: &ModelParams,
    points: &[DataPoint],
    epsilon: f64,
) -> Result<(f64, Labeling)> {
    let mut labels = Vec::with_capacity(points.len());
    for point in points {
        labels.push(residual(model, point)? < epsilon);
    }
    let labeling = Labeling::new(labels);
    Ok((labeling.inlier_count() as f64, labeling))
}

fn score_model(
    method: Method,
    model: &ModelParams,
    points: &[DataPoint],
    epsilon: f64,
) -> Result<(f64, Labeling)> {
    match method {
        Method::GraphCut => support(model, points, epsilon),
        Method::PlainRansac => top_hat_support(model, points, epsilon),
    }
}

struct BestState {
    scored: ScoredModel,
    /// Inlier count of the threshold labeling, which drives the adaptive
    /// termination.
    threshold_inliers: usize,
    /// Minimal sample this lineage started from.
    origin: Vec<usize>,
}

/// Runs the graph-cut pipeline with the given settings.
pub fn run(points: &[DataPoint], kind: ModelKind, settings: &Settings) -> Result<RunReport> {
    run_with_method(points, kind, settings, Method::GraphCut)
}

/// Runs either pipeline variant.
pub fn run_with_method(
    points: &[DataPoint],
    kind: ModelKind,
    settings: &Settings,
    method: Method,
) -> Result<RunReport> {
    settings.validate()?;
    let m = kind.min_sample_size();
    if points.len() < m {
        return Err(Error::InsufficientData {
            needed: m,
            got: points.len(),
        });
    }
    for point in points {
        if point.dim() != kind.point_dim() {
            return Err(Error::InvalidInput(format!(
                "kind `{kind}` expects {}-dimensional points, got {}",
                kind.point_dim(),
                point.dim()
            )));
        }
        if !point.is_finite() {
            return Err(Error::InvalidInput("points must be finite".into()));
        }
    }

    let start = Instant::now();
    let neighborhood = match method {
        Method::GraphCut => Some(build_neighborhood(points, settings.radius)?),
        Method::PlainRansac => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut log: Vec<SampleRecord> = Vec::new();
    let mut samples_drawn = 0usize;
    let mut lo_runs = 0usize;
    let mut gc_runs = 0usize;
    let mut best: Option<BestState> = None;
    let mut budget = settings.max_iterations;
    let mut iteration = 0usize;

    while iteration < budget {
        iteration += 1;
        let sample = draw_minimal_sample(&mut rng, points.len(), m)?;
        samples_drawn += 1;
        let sample_points: Vec<DataPoint> = sample.indices().iter().map(|&i| points[i]).collect();
        let mut record = SampleRecord {
            iteration,
            indices: sample.indices().to_vec(),
            support: 0.0,
            was_best: false,
            all_inlier: None,
        };

        // Score every root; only the best-supported one competes.
        let mut candidate: Option<(ModelParams, f64, Labeling)> = None;
        if let Ok(result) = fit_minimal(kind, &sample_points) {
            for model in result.models {
                if kind == ModelKind::Fundamental
                    && !oriented_epipolar_check(&model, &sample_points)
                {
                    continue;
                }
                // A near-singular hypothesis is skipped, not fatal.
                let (w, labeling) = match score_model(method, &model, points, settings.epsilon) {
                    Ok(scored) => scored,
                    Err(Error::SingularModel) => continue,
                    Err(err) => return Err(err),
                };
                let better = candidate.as_ref().is_none_or(|(_, bw, _)| w > *bw);
                if better {
                    candidate = Some((model, w, labeling));
                }
            }
        }

        if let Some((model, w, labeling)) = candidate {
            record.support = w;
            let improves = best.as_ref().is_none_or(|b| w > b.scored.support);
            if improves {
                record.was_best = true;
                let (k1, eta1) = best.as_ref().map_or((0, 0.0), |b| {
                    (b.scored.found_at_iteration, b.scored.found_inlier_ratio)
                });
                let threshold_inliers = labeling.inlier_count();
                let eta = labeling.inlier_ratio();
                let mut state = BestState {
                    scored: ScoredModel {
                        model,
                        labeling,
                        support: w,
                        found_at_iteration: iteration,
                        found_inlier_ratio: eta,
                    },
                    threshold_inliers,
                    origin: sample.indices().to_vec(),
                };
                if method == Method::GraphCut
                    && lo_trigger(k1, eta1, iteration, eta, m, settings.eps_conf)
                {
                    let lo = local_optimize(
                        points,
                        neighborhood.as_ref().unwrap(),
                        &state.scored,
                        settings,
                        &mut rng,
                    )?;
                    lo_runs += 1;
                    gc_runs += lo.gc_runs;
                    if lo.best.support > state.scored.support {
                        // found_inlier_ratio tracks the threshold labeling,
                        // so the count round-trips exactly.
                        state.threshold_inliers =
                            (lo.best.found_inlier_ratio * points.len() as f64).round() as usize;
                        state.scored = lo.best;
                    }
                }
                budget = required_iterations(
                    state.threshold_inliers,
                    points.len(),
                    m,
                    settings.confidence,
                    settings.max_iterations,
                );
                best = Some(state);
            }
        }
        log.push(record);
    }

    let Some(mut state) = best else {
        return Err(Error::NoModelFound(Box::new(RunDiagnostics {
            samples_drawn,
            lo_runs,
            gc_runs,
            samples: log,
        })));
    };

    // A so-far-the-best model that never earned local optimization still
    // receives one pass before the polish.
    if method == Method::GraphCut && lo_runs == 0 {
        let lo = local_optimize(
            points,
            neighborhood.as_ref().unwrap(),
            &state.scored,
            settings,
            &mut rng,
        )?;
        lo_runs += 1;
        gc_runs += lo.gc_runs;
        state.scored = lo.best;
    }

    // Final polish: least-squares over the winning labeling's inliers, then
    // support and labeling recomputed for the polished model.
    let inlier_indices = state.scored.labeling.inlier_indices();
    if inlier_indices.len() >= m {
        let subset: Vec<DataPoint> = inlier_indices.iter().map(|&i| points[i]).collect();
        if let Ok(result) = fit_lsq(kind, &subset, None) {
            if let Some(model) = result.models.into_iter().next() {
                match score_model(method, &model, points, settings.epsilon) {
                    Ok((w, labeling)) => {
                        state.scored = ScoredModel {
                            model,
                            support: w,
                            found_at_iteration: state.scored.found_at_iteration,
                            found_inlier_ratio: labeling.inlier_ratio(),
                            labeling,
                        };
                    }
                    // An unusable polish keeps the pre-polish model.
                    Err(Error::SingularModel) => {}
                    Err(err) => return Err(err),
                }
            }
        }
    }

    Ok(RunReport {
        best: state.scored,
        samples_drawn,
        lo_runs,
        gc_runs,
        wall_time: start.elapsed(),
        samples: log,
        winning_sample: state.origin,
    })
}
