use crate::error::Result;
use crate::features::PointId;

/// A generative model fitted to a subset of the data, identified by id.
///
/// `train` must be deterministic in `(ids, warm_start, seed)`.
pub trait Trainer {
    type State: Clone;

    /// Whether `train` can continue from a previous state. Active-set
    /// training refuses trainers that return `false`.
    fn supports_warm_start(&self) -> bool {
        true
    }

    fn train(&self, ids: &[PointId], warm_start: Option<&Self::State>, seed: u64) -> Result<Self::State>;
}

/// Quality of a trained model; lower is better.
pub trait QualityMetric<S> {
    fn score(&self, state: &S) -> Result<f64>;
}

impl<S, F> QualityMetric<S> for F
where
    F: Fn(&S) -> Result<f64>,
{
    fn score(&self, state: &S) -> Result<f64> {
        self(state)
    }
}
