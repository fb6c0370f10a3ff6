//! Synthetic data, desk-scale trainers and the Fréchet score.

pub mod experiment;
pub mod gaussian;
pub mod gmm;
pub mod synthetic;

pub use experiment::{run_seed, summarize, vshape_experiment, ExperimentParams, ExperimentSummary, SeedRun, TrainerKind};
pub use gaussian::{
    fit_gaussian, floor_eigenvalues, frechet_distance, moment_match, score_against_reference, FrechetMetric,
    GaussianModelState, GaussianTrainer, WarmStartPolicy, DEFAULT_RIDGE_FLOOR,
};
pub use gmm::{GmmState, GmmTrainer};
pub use synthetic::{generate_reference, generate_synthetic, Bound, ClusterSpec, Label, NoiseSpec, SyntheticData, SyntheticSpec};
