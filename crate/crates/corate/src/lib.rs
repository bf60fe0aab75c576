//! # corate
//!
//! Completion of sparse user × item rating matrices. The crate recovers
//! unobserved ratings from the observed ones using three prediction
//! families — per-item mean imputation, user-based K-nearest-neighbor
//! weighted averaging, and biased non-negative matrix factorization trained
//! by stochastic gradient descent (plus the classic multiplicative-update
//! variant for comparison) — and ships a masking cross-validation harness
//! for measuring how well each family recovers deliberately hidden ratings
//! at any sparsity level.
//!
//! ## Quick tour
//!
//! ```
//! use corate::{
//!     EstimatorConfig, ExperimentPlan, PlannedEstimator, RatingRecord, RatingsMatrix,
//! };
//!
//! // Tidy records -> user x item matrix (unrated pairs are missing).
//! let records = vec![
//!     RatingRecord::new("ana", "film-a", 4.0),
//!     RatingRecord::new("ana", "film-b", 1.0),
//!     RatingRecord::new("ben", "film-a", 4.5),
//!     RatingRecord::new("ben", "film-b", 1.5),
//!     RatingRecord::new("cam", "film-a", 4.2),
//! ];
//! let matrix = RatingsMatrix::from_records(&records, Some((0.0, 5.0))).unwrap();
//!
//! // Hide half of the observed ratings, fit on the rest, score the hidden.
//! let plan = ExperimentPlan {
//!     sparsity_levels: vec![0.5],
//!     n_iterations: 2,
//!     estimators: vec![PlannedEstimator::new("mean", EstimatorConfig::Mean)],
//!     jobs: 1,
//!     ..Default::default()
//! };
//! let report = corate::run_experiment(&matrix, &plan).unwrap();
//! assert!(report.grand_mean("mean", 0.5).is_some());
//! ```
//!
//! Runnable walkthroughs for every capability live in `examples/`; see the
//! README for the list. The `corate` binary wraps the same entry points as
//! subcommands (`run`, `complete`, `simulate`, `similarity-dump`).
//!
//! ## Time series
//!
//! For matrices whose items are a uniform time grid (item labels are integer
//! second offsets), [`dilate`] densifies a masked training view by spreading
//! each observed rating into nearby missing timepoints with a boxcar or
//! gaussian kernel. Dilation runs strictly after masking, so held-out values
//! can never leak into training. [`RatingsMatrix::resample`] changes the
//! sampling rate in either direction.

pub mod config;
pub mod dilation;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod io;
pub mod ratings;
pub mod runner;
pub mod seed;
pub mod similarity;
pub mod simulate;

pub use config::{DilationSection, EstimatorSection, ExperimentConfig, LambdasSection};
pub use dilation::{dilate, Dilated, DilationKernel, KernelShape};
pub use error::{Error, Result};
pub use estimators::{
    ClampMode, EstimatorConfig, FactorInit, KnnModel, Lambdas, MeanModel, NnmfHyperparams,
    NnmfModel, NnmfSgdConfig, PredictionMatrix, TrainStats,
};
pub use evaluation::{
    bootstrap_ci, evaluate_user_level, normalized_error, rmse, run_experiment, stratify_report,
    EvaluationReport, ExperimentPlan, FailureRecord, GroupSummaryRow, OmittedUser,
    PlannedEstimator, RunRecord, SummaryRow, UserError, UserLevelErrors,
};
pub use ratings::{ObservationMask, RatingRecord, RatingsMatrix, ResampleMode};
pub use runner::{
    cmd_complete, cmd_run, cmd_similarity_dump, cmd_simulate, CompleteOptions, CompletionStats,
    Manifest, RunArtifacts,
};
pub use similarity::{compute_similarity, Metric, SimilarityMatrix};
pub use simulate::{simulate_clusters, ClusterSpec, SimulatedData};
