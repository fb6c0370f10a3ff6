//! End-to-end synthetic experiment: centrality, schedule and sweeps over
//! several seeds.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{build_digraph, default_k, stationary_centrality, PowerIterationOptions};
use crate::curriculum::{build_schedule, run_active_set, run_normal, ActiveSetConfig, ScoreCurve};
use crate::error::{Error, Result};
use crate::simulation::gaussian::{FrechetMetric, GaussianTrainer};
use crate::simulation::gmm::GmmTrainer;
use crate::simulation::synthetic::{generate_reference, generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrainerKind {
    Gaussian,
    Gmm { components: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub base_size: usize,
    pub increment: usize,
    pub seeds: Vec<u64>,
    /// Neighbors per node; `None` uses `default_k`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_target")]
    pub target_geomean: f64,
    #[serde(default = "default_trainer")]
    pub trainer: TrainerKind,
    /// Also runs the active-set sweep when set.
    #[serde(default)]
    pub active_size: Option<usize>,
}

fn default_target() -> f64 {
    0.8
}

fn default_trainer() -> TrainerKind {
    TrainerKind::Gaussian
}

impl ExperimentParams {
    pub fn new(base_size: usize, increment: usize, seeds: Vec<u64>) -> Self {
        Self {
            base_size,
            increment,
            seeds,
            k: None,
            target_geomean: default_target(),
            trainer: default_trainer(),
            active_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::param("experiment needs at least one seed"));
        }
        if self.base_size == 0 || self.increment == 0 {
            return Err(Error::param("base size and increment must be positive"));
        }
        if !(self.target_geomean > 0.0 && self.target_geomean < 1.0) {
            return Err(Error::param("target geometric mean must lie in (0, 1)"));
        }
        if let TrainerKind::Gmm { components: 0 } = self.trainer {
            return Err(Error::param("mixture needs at least one component"));
        }
        Ok(())
    }
}

/// Result for one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub normal: ScoreCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active: Option<ScoreCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub seeds: Vec<u64>,
    pub fraction_v_shaped: f64,
    pub fraction_monotone: f64,
    pub mean_optimal_stage: f64,
    /// Optimal stage index to number of seeds.
    pub optimal_stage_histogram: BTreeMap<usize, usize>,
    /// Share of seeds whose active-set optimum is within one stage of the
    /// normal optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_active_within_one: Option<f64>,
    pub curves: Vec<SeedRun>,
}

pub fn run_seed(spec: &SyntheticSpec, params: &ExperimentParams, seed: u64) -> Result<SeedRun> {
    let spec = spec.reseeded(seed);
    let data = generate_synthetic::<f64>(&spec)?;
    let reference = generate_reference::<f64>(&spec)?;
    let features = &data.features;
    let k = match params.k {
        Some(k) => k,
        None => default_k(features.len())?,
    };
    let graph = build_digraph(features, k, params.target_geomean)?;
    let ranking = stationary_centrality(&graph, &PowerIterationOptions::default())?;
    let schedule = build_schedule(&ranking, params.base_size, params.increment)?;
    let metric = FrechetMetric::from_reference(&reference)?;
    let active_cfg = params.active_size.map(|active_size| ActiveSetConfig { active_size, seed });

    let (normal, active) = match params.trainer {
        TrainerKind::Gaussian => {
            let trainer = GaussianTrainer::new(features);
            let normal = run_normal(&schedule, &trainer, &metric, seed)?.curve;
            let active = match &active_cfg {
                Some(cfg) => Some(run_active_set(&schedule, cfg, &trainer, &metric, seed)?.curve),
                None => None,
            };
            (normal, active)
        }
        TrainerKind::Gmm { components } => {
            let trainer = GmmTrainer::new(features, components)?;
            let normal = run_normal(&schedule, &trainer, &metric, seed)?.curve;
            let active = match &active_cfg {
                Some(cfg) => Some(run_active_set(&schedule, cfg, &trainer, &metric, seed)?.curve),
                None => None,
            };
            (normal, active)
        }
    };
    Ok(SeedRun { seed, normal, active })
}

/// Runs the full pipeline for every seed (in parallel, reported in input
/// order) and summarizes the curve shapes.
pub fn vshape_experiment(spec: &SyntheticSpec, params: &ExperimentParams) -> Result<ExperimentSummary> {
    spec.validate()?;
    params.validate()?;
    let runs = params
        .seeds
        .par_iter()
        .map(|&seed| run_seed(spec, params, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(params.seeds.clone(), runs))
}

pub fn summarize(seeds: Vec<u64>, runs: Vec<SeedRun>) -> ExperimentSummary {
    let n = runs.len().max(1) as f64;
    let frac = |pred: &dyn Fn(&SeedRun) -> bool| runs.iter().filter(|r| pred(r)).count() as f64 / n;
    let fraction_v_shaped = frac(&|r| r.normal.has_interior_minimum());
    let fraction_monotone = frac(&|r| r.normal.is_non_increasing());
    let mut histogram = BTreeMap::new();
    let mut stage_sum = 0usize;
    for r in &runs {
        let i = r.normal.optimal_index.unwrap_or(0);
        *histogram.entry(i).or_insert(0) += 1;
        stage_sum += i;
    }
    let fraction_active_within_one = if runs.iter().all(|r| r.active.is_some()) && !runs.is_empty() {
        Some(frac(&|r| {
            let a = r.active.as_ref().and_then(|c| c.optimal_index).unwrap_or(0);
            let b = r.normal.optimal_index.unwrap_or(0);
            a.abs_diff(b) <= 1
        }))
    } else {
        None
    };
    ExperimentSummary {
        seeds,
        fraction_v_shaped,
        fraction_monotone,
        mean_optimal_stage: stage_sum as f64 / n,
        optimal_stage_histogram: histogram,
        fraction_active_within_one,
        curves: runs,
    }
}
