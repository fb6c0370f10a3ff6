//! Cluster-curriculum learning: centrality-ordered data schedules, curriculum
//! sweeps against pluggable trainers, and confidence-ellipsoid packing
//! geometry with percolation curves.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the common choices.

pub mod centrality;
pub mod curriculum;
pub mod error;
pub mod features;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod simulation;

pub use centrality::{
    build_digraph, calibrate_sigma, default_k, pairwise_knn, stationary_centrality, CentralityRanking, ChainVariant,
    KnnTable, PowerIterationOptions, RankEntry, WeightedDigraph,
};
pub use curriculum::{
    build_schedule, run_active_set, run_normal, sample_history, select_optimal, ActiveSetConfig, CurriculumSchedule,
    QualityMetric, ScoreCurve, Sweep, Trainer, TrainingMode,
};
pub use error::{Error, Result};
pub use features::{FeatureSet, PointId};
pub use geometry::{percolation_curve, EllipsoidSummary, PercolationCurve};
pub use io::{read_features, FeatureFormat};
pub use scalar::Scalar;
pub use simulation::{
    frechet_distance, generate_synthetic, score_against_reference, vshape_experiment, ExperimentParams,
    ExperimentSummary, FrechetMetric, GaussianModelState, GaussianTrainer, GmmState, GmmTrainer, SyntheticSpec,
};

pub type FeatureSet32 = FeatureSet<f32>;
pub type FeatureSet64 = FeatureSet<f64>;
pub type KnnTable32 = KnnTable<f32>;
pub type KnnTable64 = KnnTable<f64>;
pub type WeightedDigraph32 = WeightedDigraph<f32>;
pub type WeightedDigraph64 = WeightedDigraph<f64>;
pub type CentralityRanking32 = CentralityRanking<f32>;
pub type CentralityRanking64 = CentralityRanking<f64>;
pub type EllipsoidSummary32 = EllipsoidSummary<f32>;
pub type EllipsoidSummary64 = EllipsoidSummary<f64>;
pub type PercolationCurve32 = PercolationCurve<f32>;
pub type PercolationCurve64 = PercolationCurve<f64>;
pub type GaussianModelState32 = GaussianModelState<f32>;
pub type GaussianModelState64 = GaussianModelState<f64>;
pub type GmmState32 = GmmState<f32>;
pub type GmmState64 = GmmState<f64>;
