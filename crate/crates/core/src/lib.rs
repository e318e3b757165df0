//! Robust geometric model fitting with a graph-cut local-optimization step.
//!
//! The estimator follows the hypothesize-and-verify scheme: draw minimal
//! samples, score hypotheses by a Gaussian-kernel support, and refine each
//! so-far-the-best model by alternating a globally optimal inlier/outlier
//! labeling — a min-cut over a unary + spatial-coherence energy — with
//! least-squares refitting. Supported models: 2D lines, affine maps,
//! homographies, and fundamental matrices.
//!
//! Entry points: [`engine::run`] for the full pipeline,
//! [`harness::run_experiment`] for synthetic benchmark sweeps.

pub mod engine;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod maxflow;
pub mod neighborhood;

pub use engine::{run, run_with_method, Method, RunReport};
pub use error::{Error, Result};
pub use geometry::{DataPoint, Labeling, ModelKind, ModelParams, ScoredModel, Settings};
