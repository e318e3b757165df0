//! Multi-trial experiment runner over synthetic line scenes, with per-trial
//! and aggregate CSV emission.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::engine::{run_with_method, Method};
use crate::error::{Error, Result};
use crate::geometry::{residual, ModelKind, Settings};
use crate::harness::metrics::angular_error;
use crate::harness::scenes::{gen_line_scene, LineStyle};

/// A run counts as successful when its final angular error is below this.
pub const SUCCESS_MAX_ANGULAR_ERROR_DEG: f64 = 2.0;

/// Floor on the "farther than σ" test so that floating-point dust on
/// noiseless scenes does not flag exact inliers.
const NOT_ALL_INLIER_FLOOR: f64 = 1e-9;

/// Which estimator variant a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodTag {
    /// Full pipeline.
    Gc,
    /// Top-hat, LO-suppressed plain baseline.
    Baseline,
    /// Full pipeline with the spatial term disabled (λ = 0).
    GcNoSpatial,
}

impl MethodTag {
    fn engine_method(self) -> Method {
        match self {
            MethodTag::Gc | MethodTag::GcNoSpatial => Method::GraphCut,
            MethodTag::Baseline => Method::PlainRansac,
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodTag::Gc => "gc",
            MethodTag::Baseline => "baseline",
            MethodTag::GcNoSpatial => "gc-no-spatial",
        })
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gc" => Ok(MethodTag::Gc),
            "baseline" | "plain-baseline" => Ok(MethodTag::Baseline),
            "gc-no-spatial" | "gc-nospatial" => Ok(MethodTag::GcNoSpatial),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

/// Cross product of methods × styles × sigmas × outlier counts, times
/// `trials` seeds per cell.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodTag>,
    pub styles: Vec<LineStyle>,
    pub sigmas: Vec<f64>,
    pub outlier_counts: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub settings: Settings,
    /// Per-cell threshold ε = max(settings.epsilon, scale·σ); 0 keeps the
    /// base ε everywhere.
    pub epsilon_sigma_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: vec![MethodTag::Gc, MethodTag::Baseline],
            styles: vec![LineStyle::Straight, LineStyle::Dashed],
            sigmas: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            outlier_counts: vec![100, 500],
            trials: 200,
            base_seed: 0,
            settings: Settings::default(),
            epsilon_sigma_scale: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty()
            || self.styles.is_empty()
            || self.sigmas.is_empty()
            || self.outlier_counts.is_empty()
            || self.trials == 0
        {
            return Err(Error::InvalidInput(
                "experiment grid must be non-empty with at least one trial".into(),
            ));
        }
        if self.sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidInput("sigma must be non-negative".into()));
        }
        if self.epsilon_sigma_scale.is_nan() || self.epsilon_sigma_scale < 0.0 {
            return Err(Error::InvalidInput(
                "epsilon_sigma_scale must be non-negative".into(),
            ));
        }
        self.settings.validate()
    }
}

/// One finished trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub method: MethodTag,
    pub kind: ModelKind,
    pub style: LineStyle,
    pub sigma: f64,
    pub outliers: usize,
    pub seed: u64,
    /// Angular error against the scene's ground truth, degrees.
    pub error: f64,
    pub time_ms: f64,
    pub samples: usize,
    pub lo_runs: usize,
    pub gc_runs: usize,
    /// True when the run succeeded (angular error below
    /// [`SUCCESS_MAX_ANGULAR_ERROR_DEG`]) from a winning sample that
    /// contained at least one point farther from the ground truth than σ.
    pub not_all_inlier_success: Option<bool>,
}

/// A trial that returned an error instead of a model.
#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub method: MethodTag,
    pub style: LineStyle,
    pub sigma: f64,
    pub outliers: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub enum TrialOutcome {
    Completed(TrialRecord),
    Failed(TrialFailure),
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

struct TrialJob {
    order: usize,
    method: MethodTag,
    style: LineStyle,
    sigma: f64,
    outliers: usize,
    scene_seed: u64,
}

fn run_trial(config: &ExperimentConfig, job: &TrialJob) -> TrialOutcome {
    let scene = gen_line_scene(job.style, job.sigma, job.outliers, job.scene_seed);
    let mut settings = config.settings.clone();
    settings.epsilon = settings.epsilon.max(config.epsilon_sigma_scale * job.sigma);
    settings.seed = splitmix64(job.scene_seed ^ 0x5EED);
    if job.method == MethodTag::GcNoSpatial {
        settings.lambda = 0.0;
    }
    let started = Instant::now();
    let report = match run_with_method(
        &scene.points,
        ModelKind::Line2D,
        &settings,
        job.method.engine_method(),
    ) {
        Ok(report) => report,
        Err(err) => {
            return TrialOutcome::Failed(TrialFailure {
                method: job.method,
                style: job.style,
                sigma: job.sigma,
                outliers: job.outliers,
                seed: job.scene_seed,
                message: err.to_string(),
            });
        }
    };
    let time_ms = started.elapsed().as_secs_f64() * 1e3;
    let error = angular_error(&report.best.model, &scene.ground_truth);
    // Did a contaminated minimal sample win?
    let threshold = job.sigma.max(NOT_ALL_INLIER_FLOOR);
    let not_all_inlier = report.winning_sample.iter().any(|&i| {
        residual(&scene.ground_truth, &scene.points[i]).unwrap_or(f64::INFINITY) > threshold
    });
    let success = error < SUCCESS_MAX_ANGULAR_ERROR_DEG;
    TrialOutcome::Completed(TrialRecord {
        method: job.method,
        kind: ModelKind::Line2D,
        style: job.style,
        sigma: job.sigma,
        outliers: job.outliers,
        seed: job.scene_seed,
        error,
        time_ms,
        samples: report.samples_drawn,
        lo_runs: report.lo_runs,
        gc_runs: report.gc_runs,
        not_all_inlier_success: Some(success && not_all_inlier),
    })
}

/// Runs every trial of the grid (in parallel over the global thread pool)
/// and returns the outcomes in a deterministic order. Scene seeds depend on
/// the cell and trial index only, so every method sees identical scenes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let mut jobs = Vec::new();
    let mut order = 0;
    for &method in &config.methods {
        for &style in &config.styles {
            for (sigma_index, &sigma) in config.sigmas.iter().enumerate() {
                for (outlier_index, &outliers) in config.outlier_counts.iter().enumerate() {
                    for trial in 0..config.trials {
                        let cell = (style as u64) << 48
                            | (sigma_index as u64) << 32
                            | (outlier_index as u64) << 16
                            | trial as u64;
                        jobs.push(TrialJob {
                            order,
                            method,
                            style,
                            sigma,
                            outliers,
                            scene_seed: splitmix64(config.base_seed ^ cell),
                        });
                        order += 1;
                    }
                }
            }
        }
    }
    let mut outcomes: Vec<(usize, TrialOutcome)> = jobs
        .par_iter()
        .map(|job| (job.order, run_trial(config, job)))
        .collect();
    outcomes.sort_by_key(|(order, _)| *order);
    Ok(outcomes.into_iter().map(|(_, outcome)| outcome).collect())
}

/// Per-cell means over the completed trials of one method.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub method: MethodTag,
    pub kind: ModelKind,
    pub style: LineStyle,
    pub sigma: f64,
    pub outliers: usize,
    pub trials: usize,
    pub error: f64,
    pub time_ms: f64,
    pub samples: f64,
    pub lo_runs: f64,
    pub gc_runs: f64,
    /// Fraction of trials whose flag was set.
    pub not_all_inlier_success: Option<f64>,
}

pub fn aggregate(outcomes: &[TrialOutcome]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    for outcome in outcomes {
        let TrialOutcome::Completed(record) = outcome else {
            continue;
        };
        let key = |row: &AggregateRow| {
            row.method == record.method
                && row.style == record.style
                && row.sigma == record.sigma
                && row.outliers == record.outliers
        };
        if !rows.iter().any(key) {
            rows.push(AggregateRow {
                method: record.method,
                kind: record.kind,
                style: record.style,
                sigma: record.sigma,
                outliers: record.outliers,
                trials: 0,
                error: 0.0,
                time_ms: 0.0,
                samples: 0.0,
                lo_runs: 0.0,
                gc_runs: 0.0,
                not_all_inlier_success: None,
            });
        }
        let row = rows.iter_mut().find(|r| key(r)).unwrap();
        row.trials += 1;
        row.error += record.error;
        row.time_ms += record.time_ms;
        row.samples += record.samples as f64;
        row.lo_runs += record.lo_runs as f64;
        row.gc_runs += record.gc_runs as f64;
        if let Some(flag) = record.not_all_inlier_success {
            *row.not_all_inlier_success.get_or_insert(0.0) += f64::from(flag);
        }
    }
    for row in &mut rows {
        let n = row.trials as f64;
        row.error /= n;
        row.time_ms /= n;
        row.samples /= n;
        row.lo_runs /= n;
        row.gc_runs /= n;
        if let Some(flag) = row.not_all_inlier_success.as_mut() {
            *flag /= n;
        }
    }
    rows
}

pub const TRIALS_CSV_HEADER: &str =
    "method,kind,style,sigma,outliers,seed,error,time_ms,samples,lo_runs,gc_runs,not_all_inlier_success";

/// One CSV row per trial; failed trials carry `nan` in the error column.
pub fn write_trials_csv(path: impl AsRef<Path>, outcomes: &[TrialOutcome]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(TRIALS_CSV_HEADER);
    out.push('\n');
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Completed(r) => {
                let flag = match r.not_all_inlier_success {
                    Some(true) => "true",
                    Some(false) => "false",
                    None => "",
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.method,
                    r.kind,
                    r.style,
                    r.sigma,
                    r.outliers,
                    r.seed,
                    r.error,
                    r.time_ms,
                    r.samples,
                    r.lo_runs,
                    r.gc_runs,
                    flag
                );
            }
            TrialOutcome::Failed(f) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},nan,nan,0,0,0,",
                    f.method,
                    ModelKind::Line2D,
                    f.style,
                    f.sigma,
                    f.outliers,
                    f.seed
                );
            }
        }
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const AGGREGATE_CSV_HEADER: &str =
    "method,kind,style,sigma,outliers,trials,error,time_ms,samples,lo_runs,gc_runs,not_all_inlier_success";

pub fn write_aggregate_csv(path: impl AsRef<Path>, rows: &[AggregateRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(AGGREGATE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let flag = r
            .not_all_inlier_success
            .map(|f| f.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.kind,
            r.style,
            r.sigma,
            r.outliers,
            r.trials,
            r.error,
            r.time_ms,
            r.samples,
            r.lo_runs,
            r.gc_runs,
            flag
        );
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fixed-width table of aggregate rows for terminal output.
pub fn render_aggregate_table(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<9} {:>6} {:>9} {:>10} {:>10} {:>9} {:>8} {:>8} {:>8}",
        "method", "style", "sigma", "outliers", "trials", "error", "time_ms", "samples", "lo", "gc"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:<9} {:>6} {:>9} {:>10} {:>10.4} {:>9.2} {:>8.1} {:>8.2} {:>8.2}",
            r.method.to_string(),
            r.style.to_string(),
            r.sigma,
            r.outliers,
            r.trials,
            r.error,
            r.time_ms,
            r.samples,
            r.lo_runs,
            r.gc_runs
        );
    }
    out
}
