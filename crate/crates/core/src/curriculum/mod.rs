//! Centrality-ordered curricula and the two training sweeps over them.

pub mod schedule;
pub mod sweep;
pub mod trainer;

pub use schedule::{build_schedule, CurriculumSchedule};
pub use sweep::{
    run_active_set, run_normal, sample_history, select_optimal, ActiveSetConfig, ScoreCurve, Sweep,
    TrainingMode,
};
pub use trainer::{QualityMetric, Trainer};
