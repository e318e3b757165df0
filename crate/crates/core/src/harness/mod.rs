//! Benchmark harness: synthetic scene generation, ground-truth metrics,
//! dataset file I/O, and the multi-trial experiment runner with CSV output.

mod dataset;
mod experiment;
mod metrics;
mod scenes;

pub use dataset::{load_dataset, save_dataset, Dataset};
pub use experiment::{
    aggregate, render_aggregate_table, run_experiment, write_aggregate_csv, write_trials_csv,
    AggregateRow, ExperimentConfig, MethodTag, TrialFailure, TrialOutcome, TrialRecord,
    SUCCESS_MAX_ANGULAR_ERROR_DEG,
};
pub use metrics::{angular_error, model_error};
pub use scenes::{
    gen_affine_scene, gen_fundamental_scene, gen_homography_scene, gen_line_scene,
    CorrespondenceScene, LineStyle, SyntheticLineScene, WINDOW_SIZE,
};
