//! Command-line front end: single-shot model fitting, synthetic scene
//! generation, and benchmark sweeps.
//!
//! Exit codes: 0 success, 2 when no model could be estimated (including
//! insufficient data), 1 for usage, configuration, and I/O errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gcransac::engine::{run_with_method, Method};
use gcransac::error::Error;
use gcransac::geometry::{ModelKind, Settings};
use gcransac::harness::{
    aggregate, gen_line_scene, load_dataset, render_aggregate_table, run_experiment, save_dataset,
    write_aggregate_csv, write_trials_csv, Dataset, ExperimentConfig, LineStyle, MethodTag,
};

#[derive(Parser)]
#[command(
    name = "gcransac",
    version,
    about = "Robust geometric model fitting with graph-cut local optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a dataset file.
    Fit(FitArgs),
    /// Generate a synthetic 2D line scene.
    Synth(SynthArgs),
    /// Run a benchmark sweep over synthetic line scenes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Line,
    Affine,
    Homography,
    Fundamental,
}

impl From<ModelArg> for ModelKind {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Line => ModelKind::Line2D,
            ModelArg::Affine => ModelKind::Affine2D,
            ModelArg::Homography => ModelKind::Homography,
            ModelArg::Fundamental => ModelKind::Fundamental,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StyleArg {
    Straight,
    Dashed,
}

impl From<StyleArg> for LineStyle {
    fn from(value: StyleArg) -> Self {
        match value {
            StyleArg::Straight => LineStyle::Straight,
            StyleArg::Dashed => LineStyle::Dashed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Gc,
    Baseline,
    GcNoSpatial,
}

#[derive(Args)]
struct SettingsArgs {
    /// Residual threshold ε, in model-residual units.
    #[arg(long, default_value_t = 0.31)]
    epsilon: f64,
    /// Neighborhood radius in pixels.
    #[arg(long, default_value_t = 20.0)]
    radius: f64,
    /// Spatial-coherence weight λ.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Confidence-ratio threshold gating local optimization.
    #[arg(long = "eps-conf", default_value_t = 10.0)]
    eps_conf: f64,
    /// Desired success probability of the adaptive termination.
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Hard cap on main-loop iterations.
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,
}

impl SettingsArgs {
    fn build(&self, seed: u64) -> Settings {
        Settings {
            epsilon: self.epsilon,
            radius: self.radius,
            lambda: self.lambda,
            eps_conf: self.eps_conf,
            confidence: self.confidence,
            max_iterations: self.max_iters,
            seed,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Input dataset file (`x y [flag]` or `x1 y1 x2 y2 [flag]` rows).
    #[arg(long)]
    input: PathBuf,
    /// Model kind to fit.
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Estimator variant.
    #[arg(long, value_enum, default_value_t = MethodArg::Gc)]
    method: MethodArg,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Emit one JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Line style.
    #[arg(long, value_enum)]
    style: StyleArg,
    /// Noise standard deviation in pixels.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Number of uniform outliers.
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    /// Scene seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path; the ground-truth line goes to `<out>.gt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid spec, e.g. `style=straight,dashed;sigma=0,2,4;outliers=100,500`.
    #[arg(
        long,
        default_value = "style=straight,dashed;sigma=0,2,4,6,8;outliers=100,500"
    )]
    grid: String,
    /// Trials per grid cell.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Methods to run.
    #[arg(long, default_value = "gc,baseline", value_delimiter = ',')]
    methods: Vec<String>,
    /// Directory for `results.csv` and `results.agg.csv`.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Base seed for the sweep.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-cell threshold ε = max(ε, scale·σ).
    #[arg(long = "epsilon-sigma-scale", default_value_t = 2.0)]
    epsilon_sigma_scale: f64,
    #[command(flatten)]
    settings: SettingsArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InsufficientData { .. } | Error::NoModelFound(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

/// Nine significant digits.
fn sig9(value: f64) -> String {
    format!("{value:.8e}")
}

#[derive(Serialize)]
struct FitOutput {
    model: String,
    theta: Vec<f64>,
    inliers: usize,
    support: f64,
    samples: usize,
    lo_runs: usize,
    gc_runs: usize,
    time_ms: f64,
}

fn cmd_fit(args: &FitArgs) -> Result<(), Error> {
    let dataset = load_dataset(&args.input)?;
    let kind = ModelKind::from(args.model);
    let mut settings = args.settings.build(args.seed);
    if matches!(args.method, MethodArg::GcNoSpatial) {
        settings.lambda = 0.0;
    }
    let method = match args.method {
        MethodArg::Gc | MethodArg::GcNoSpatial => Method::GraphCut,
        MethodArg::Baseline => Method::PlainRansac,
    };
    let report = run_with_method(&dataset.points, kind, &settings, method)?;
    let time_ms = report.wall_time.as_secs_f64() * 1e3;
    if args.json {
        let output = FitOutput {
            model: kind.to_string(),
            theta: report.best.model.theta().to_vec(),
            inliers: report.best.labeling.inlier_count(),
            support: report.best.support,
            samples: report.samples_drawn,
            lo_runs: report.lo_runs,
            gc_runs: report.gc_runs,
            time_ms,
        };
        println!(
            "{}",
            serde_json::to_string(&output).expect("fit output serializes")
        );
    } else {
        let theta = report
            .best
            .model
            .theta()
            .iter()
            .map(|&v| sig9(v))
            .collect::<Vec<_>>()
            .join(" ");
        println!("model: {kind}");
        println!("theta: {theta}");
        println!("inliers: {}", report.best.labeling.inlier_count());
        println!("support: {}", sig9(report.best.support));
        println!("samples: {}", report.samples_drawn);
        println!("lo_runs: {}", report.lo_runs);
        println!("gc_runs: {}", report.gc_runs);
        println!("time_ms: {time_ms:.3}");
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Error> {
    if !(args.sigma >= 0.0 && args.sigma.is_finite()) {
        return Err(Error::InvalidInput("sigma must be non-negative".into()));
    }
    let scene = gen_line_scene(args.style.into(), args.sigma, args.outliers, args.seed);
    let dataset = Dataset {
        points: scene.points,
        ground_truth_inliers: Some(scene.inlier_mask),
        model_hint: None,
        name: String::new(),
    };
    save_dataset(&args.out, &dataset)?;
    let theta = scene.ground_truth.theta();
    let mut gt_path = args.out.clone().into_os_string();
    gt_path.push(".gt");
    let gt_path = PathBuf::from(gt_path);
    let body = format!("line {} {} {}\n", theta[0], theta[1], theta[2]);
    std::fs::write(&gt_path, body).map_err(|source| Error::Io {
        path: gt_path.clone(),
        source,
    })?;
    Ok(())
}

type GridAxes = (Vec<LineStyle>, Vec<f64>, Vec<usize>);

/// Parses `style=...;sigma=...;outliers=...` into grid axes; omitted keys
/// keep the given defaults.
fn parse_grid(spec: &str, defaults: &ExperimentConfig) -> Result<GridAxes, Error> {
    let mut styles = defaults.styles.clone();
    let mut sigmas = defaults.sigmas.clone();
    let mut outliers = defaults.outlier_counts.clone();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("grid entry `{part}` has no `=`")))?;
        let values: Vec<&str> = values.split(',').map(str::trim).collect();
        match key.trim() {
            "style" => {
                styles = values
                    .iter()
                    .map(|v| v.parse::<LineStyle>())
                    .collect::<Result<_, _>>()?;
            }
            "sigma" => {
                sigmas = values
                    .iter()
                    .map(|v| {
                        v.parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("bad sigma `{v}` in grid")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "outliers" => {
                outliers = values
                    .iter()
                    .map(|v| {
                        v.parse::<usize>().map_err(|_| {
                            Error::InvalidInput(format!("bad outlier count `{v}` in grid"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown grid key `{other}` (expected style, sigma, outliers)"
                )));
            }
        }
    }
    Ok((styles, sigmas, outliers))
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Error> {
    if let Ok(threads) = std::env::var("GCRANSAC_THREADS") {
        let threads: usize = threads.parse().map_err(|_| {
            Error::InvalidInput(format!(
                "GCRANSAC_THREADS must be an integer, got `{threads}`"
            ))
        })?;
        // Ignored if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let defaults = ExperimentConfig::default();
    let (styles, sigmas, outlier_counts) = parse_grid(&args.grid, &defaults)?;
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<MethodTag>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = ExperimentConfig {
        methods,
        styles,
        sigmas,
        outlier_counts,
        trials: args.trials,
        base_seed: args.seed,
        settings: args.settings.build(args.seed),
        epsilon_sigma_scale: args.epsilon_sigma_scale,
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let outcomes = run_experiment(&config)?;
    let rows = aggregate(&outcomes);
    write_trials_csv(args.out_dir.join("results.csv"), &outcomes)?;
    write_aggregate_csv(args.out_dir.join("results.agg.csv"), &rows)?;
    let mut summary = String::new();
    let failed = outcomes
        .iter()
        .filter(|o| matches!(o, gcransac::harness::TrialOutcome::Failed(_)))
        .count();
    let _ = write!(summary, "{}", render_aggregate_table(&rows));
    if failed > 0 {
        let _ = writeln!(summary, "{failed} trial(s) failed; see results.csv");
    }
    print!("{summary}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_overrides_only_named_axes() {
        let defaults = ExperimentConfig::default();
        let (styles, sigmas, outliers) = parse_grid("sigma=1,2;outliers=50", &defaults).unwrap();
        assert_eq!(styles, defaults.styles);
        assert_eq!(sigmas, vec![1.0, 2.0]);
        assert_eq!(outliers, vec![50]);
        let (styles, ..) = parse_grid("style=dashed", &defaults).unwrap();
        assert_eq!(styles, vec![LineStyle::Dashed]);
        assert!(parse_grid("epsilon=1", &defaults).is_err());
        assert!(parse_grid("sigma", &defaults).is_err());
    }

    #[test]
    fn sig9_has_nine_significant_digits() {
        assert_eq!(sig9(0.31), "3.10000000e-1");
        assert_eq!(sig9(-123.456), "-1.23456000e2");
    }
}
