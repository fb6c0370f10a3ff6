//! Curriculum sweeps: re-initialized training on growing prefixes, and
//! warm-started training on a fixed-size active set.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curriculum::schedule::CurriculumSchedule;
use crate::curriculum::trainer::{QualityMetric, Trainer};
use crate::error::{Error, Result};
use crate::features::PointId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    Normal,
    ActiveSet,
}

/// Score per curriculum stage, lower is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreCurve {
    pub mode: TrainingMode,
    pub cumulative_sizes: Vec<usize>,
    pub scores: Vec<f64>,
    /// `None` only for the empty partial curve of a sweep that failed at
    /// stage 0.
    pub optimal_index: Option<usize>,
    pub seed: u64,
}

impl ScoreCurve {
    fn new(mode: TrainingMode, cumulative_sizes: Vec<usize>, scores: Vec<f64>, seed: u64) -> Self {
        let optimal_index = select_optimal(&scores).ok();
        Self {
            mode,
            cumulative_sizes,
            scores,
            optimal_index,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Minimum strictly inside the curve and strictly below both endpoints.
    pub fn has_interior_minimum(&self) -> bool {
        match (self.optimal_index, self.scores.first(), self.scores.last()) {
            (Some(i), Some(&first), Some(&last)) if i > 0 && i + 1 < self.scores.len() => {
                let best = self.scores[i];
                best < first && best < last
            }
            _ => false,
        }
    }

    pub fn is_non_increasing(&self) -> bool {
        self.scores.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Curve plus the model trained at every stage.
#[derive(Debug, Clone)]
pub struct Sweep<S> {
    pub curve: ScoreCurve,
    pub models: Vec<S>,
}

impl<S> Sweep<S> {
    pub fn optimal_model(&self) -> Option<&S> {
        self.curve.optimal_index.map(|i| &self.models[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveSetConfig {
    pub active_size: usize,
    /// Seed of the history sampler.
    pub seed: u64,
}

/// Index of the smallest score, ties to the smallest index. NaN never wins
/// against a number.
pub fn select_optimal(scores: &[f64]) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::param("cannot select from an empty score list"));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] || (scores[best].is_nan() && !s.is_nan()) {
            best = i;
        }
    }
    Ok(best)
}

/// Uniform sample of `needed` ids without replacement, reproducible under
/// `seed`.
pub fn sample_history(trained: &[PointId], needed: usize, seed: u64) -> Result<Vec<PointId>> {
    if needed > trained.len() {
        return Err(Error::param(format!(
            "cannot sample {needed} ids from a history of {}",
            trained.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = trained.to_vec();
    let (picked, _) = pool.partial_shuffle(&mut rng, needed);
    Ok(picked.to_vec())
}

/// SplitMix64 finalizer over `(seed, stream, stage)`, so stage seeds are
/// decorrelated from each other and from the sampler's.
pub(crate) fn derive_seed(seed: u64, stream: u64, stage: usize) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93)
        ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TRAIN_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;

fn stage_failure(
    stage: usize,
    mode: TrainingMode,
    cumulative: &[usize],
    scores: Vec<f64>,
    seed: u64,
    source: Error,
) -> Error {
    let partial = ScoreCurve::new(mode, cumulative[..scores.len()].to_vec(), scores, seed);
    Error::StageFailed {
        stage,
        partial: Box::new(partial),
        source: Box::new(source),
    }
}

/// Trains a freshly initialized model on every cumulative prefix
/// `X0 ∪ … ∪ Xi`, including the bare base set, and scores each.
///
/// Stages are independent and run in parallel; the result does not depend
/// on scheduling.
pub fn run_normal<Tr, M>(
    schedule: &CurriculumSchedule,
    trainer: &Tr,
    metric: &M,
    seed: u64,
) -> Result<Sweep<Tr::State>>
where
    Tr: Trainer + Sync,
    Tr::State: Send,
    M: QualityMetric<Tr::State> + Sync,
{
    let cumulative = schedule.cumulative_sizes();
    let results: Vec<Result<(Tr::State, f64)>> = (0..schedule.stages.len())
        .into_par_iter()
        .map(|stage| {
            let ids = schedule.prefix(stage);
            let state = trainer.train(&ids, None, derive_seed(seed, TRAIN_STREAM, stage))?;
            let score = metric.score(&state)?;
            Ok((state, score))
        })
        .collect();

    let mut models = Vec::with_capacity(results.len());
    let mut scores = Vec::with_capacity(results.len());
    for (stage, r) in results.into_iter().enumerate() {
        match r {
            Ok((state, score)) => {
                models.push(state);
                scores.push(score);
            }
            Err(e) => return Err(stage_failure(stage, TrainingMode::Normal, &cumulative, scores, seed, e)),
        }
    }
    Ok(Sweep {
        curve: ScoreCurve::new(TrainingMode::Normal, cumulative, scores, seed),
        models,
    })
}

/// Trains the base set from scratch, then each later stage on an active set
/// of `active_size` ids (the new increment plus a fresh uniform sample of the
/// history), warm-starting from the previous stage's model.
///
/// When the history is smaller than `active_size - |Xi|`, the whole history
/// is used.
pub fn run_active_set<Tr, M>(
    schedule: &CurriculumSchedule,
    config: &ActiveSetConfig,
    trainer: &Tr,
    metric: &M,
    seed: u64,
) -> Result<Sweep<Tr::State>>
where
    Tr: Trainer,
    M: QualityMetric<Tr::State>,
{
    let total = schedule.total();
    if config.active_size < schedule.increment || config.active_size > total {
        return Err(Error::param(format!(
            "active set size must satisfy increment <= size <= m (size = {}, increment = {}, m = {total})",
            config.active_size, schedule.increment
        )));
    }
    if !trainer.supports_warm_start() {
        return Err(Error::WarmStartUnsupported);
    }
    let cumulative = schedule.cumulative_sizes();
    let mode = TrainingMode::ActiveSet;
    let mut models: Vec<Tr::State> = Vec::with_capacity(schedule.stages.len());
    let mut scores = Vec::with_capacity(schedule.stages.len());
    let mut history: Vec<PointId> = Vec::with_capacity(total);

    for (stage, new_ids) in schedule.stages.iter().enumerate() {
        let step = || -> Result<(Tr::State, f64)> {
            let state = if stage == 0 {
                trainer.train(new_ids, None, derive_seed(seed, TRAIN_STREAM, 0))?
            } else {
                let needed = (config.active_size - new_ids.len()).min(history.len());
                let mut active =
                    sample_history(&history, needed, derive_seed(config.seed, SAMPLE_STREAM, stage))?;
                active.extend_from_slice(new_ids);
                trainer.train(&active, models.last(), derive_seed(seed, TRAIN_STREAM, stage))?
            };
            let score = metric.score(&state)?;
            Ok((state, score))
        };
        match step() {
            Ok((state, score)) => {
                models.push(state);
                scores.push(score);
            }
            Err(e) => return Err(stage_failure(stage, mode, &cumulative, scores, seed, e)),
        }
        history.extend_from_slice(new_ids);
    }
    Ok(Sweep {
        curve: ScoreCurve::new(mode, cumulative, scores, seed),
        models,
    })
}
