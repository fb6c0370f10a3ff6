use std::collections::HashSet;
use std::sync::Mutex;

use curriculum_core::centrality::{build_digraph, default_k, stationary_centrality};
use curriculum_core::curriculum::{
    build_schedule, run_active_set, run_normal, ActiveSetConfig, CurriculumSchedule, Trainer,
};
use curriculum_core::simulation::{fit_gaussian, FrechetMetric, GaussianTrainer, GmmTrainer};
use curriculum_core::{FeatureSet, PointId, QualityMetric, Result};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn blob_with_noise(seed: u64) -> FeatureSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = Array2::from_shape_fn((400, 3), |(i, _)| {
        if i < 300 {
            rng.sample::<f64, _>(StandardNormal)
        } else {
            rng.random_range(-8.0..8.0)
        }
    });
    FeatureSet::with_sequential_ids(pts).unwrap()
}

fn schedule_for(fs: &FeatureSet<f64>, base: usize, inc: usize) -> (Vec<PointId>, CurriculumSchedule) {
    let g = build_digraph(fs, default_k(fs.len()).unwrap(), 0.8).unwrap();
    let r = stationary_centrality(&g, &Default::default()).unwrap();
    (r.order(), build_schedule(&r, base, inc).unwrap())
}

#[test]
fn prefixes_are_top_centrality_ids() {
    let fs = blob_with_noise(1);
    let (order, s) = schedule_for(&fs, 100, 30);
    assert_eq!(s.stages.len(), 1 + 10);
    assert_eq!(s.stages.concat(), order);
    for stage in 0..s.stages.len() {
        let expected = (100 + 30 * stage).min(400);
        let prefix = s.prefix(stage);
        assert_eq!(prefix.len(), expected);
        assert_eq!(prefix.as_slice(), &order[..expected]);
    }
}

/// Wraps the Gaussian trainer and records every training set.
struct Logged<'a> {
    inner: GaussianTrainer<'a, f64>,
    calls: Mutex<Vec<Vec<PointId>>>,
}

impl Trainer for Logged<'_> {
    type State = <GaussianTrainer<'static, f64> as Trainer>::State;

    fn train(&self, ids: &[PointId], warm: Option<&Self::State>, seed: u64) -> Result<Self::State> {
        self.calls.lock().unwrap().push(ids.to_vec());
        self.inner.train(ids, warm, seed)
    }
}

#[test]
fn active_sets_have_fixed_size_and_fresh_increment() {
    let fs = blob_with_noise(2);
    let (_, s) = schedule_for(&fs, 100, 50);
    let reference = FrechetMetric::from_reference(&fs).unwrap();
    let trainer = Logged {
        inner: GaussianTrainer::new(&fs),
        calls: Mutex::new(Vec::new()),
    };
    let cfg = ActiveSetConfig { active_size: 120, seed: 4 };
    let curve = run_active_set(&s, &cfg, &trainer, &reference, 9).unwrap().curve;
    assert_eq!(curve.len(), s.stages.len());
    let calls = trainer.calls.into_inner().unwrap();
    assert_eq!(calls[0], s.stages[0]);
    let mut seen: HashSet<PointId> = s.stages[0].iter().copied().collect();
    for (stage, set) in calls.iter().enumerate().skip(1) {
        let new: HashSet<PointId> = s.stages[stage].iter().copied().collect();
        let unique: HashSet<PointId> = set.iter().copied().collect();
        assert_eq!(unique.len(), set.len());
        let expected = 120.min(seen.len() + new.len());
        assert_eq!(set.len(), expected, "stage {stage}");
        assert_eq!(set.iter().filter(|id| new.contains(id)).count(), new.len());
        assert!(set.iter().filter(|id| !new.contains(id)).all(|id| seen.contains(id)));
        seen.extend(new);
    }
}

#[test]
fn full_active_set_matches_normal_training() {
    let fs = blob_with_noise(3);
    let (_, s) = schedule_for(&fs, 100, 60);
    let metric = FrechetMetric::from_reference(&fs).unwrap();
    let trainer = GaussianTrainer::new(&fs);
    let normal = run_normal(&s, &trainer, &metric, 1).unwrap().curve;
    let cfg = ActiveSetConfig { active_size: 400, seed: 2 };
    let active = run_active_set(&s, &cfg, &trainer, &metric, 1).unwrap().curve;
    assert_eq!(normal.len(), active.len());
    assert_eq!(normal.optimal_index, active.optimal_index);
    for (a, b) in normal.scores.iter().zip(&active.scores) {
        assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }
}

#[test]
fn normal_sweep_equals_exhaustive_prefix_scoring() {
    let fs = blob_with_noise(4);
    let (order, s) = schedule_for(&fs, 80, 40);
    let reference = FrechetMetric::from_reference(&fs).unwrap();
    let curve = run_normal(&s, &GaussianTrainer::new(&fs), &reference, 0).unwrap().curve;
    for (stage, &size) in curve.cumulative_sizes.iter().enumerate() {
        let rows = fs.rows_of(&order[..size]).unwrap();
        let state = fit_gaussian(fs.gather(&rows).view(), 1e-6).unwrap();
        assert_eq!(reference.score(&state).unwrap(), curve.scores[stage]);
    }
}

#[test]
fn sweeps_are_bitwise_reproducible() {
    let fs = blob_with_noise(5);
    let (_, s) = schedule_for(&fs, 100, 50);
    let metric = FrechetMetric::from_reference(&fs).unwrap();
    let gmm = GmmTrainer::new(&fs, 2).unwrap();
    let cfg = ActiveSetConfig { active_size: 150, seed: 3 };
    let a = run_active_set(&s, &cfg, &gmm, &metric, 8).unwrap().curve;
    let b = run_active_set(&s, &cfg, &gmm, &metric, 8).unwrap().curve;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let a = run_normal(&s, &gmm, &metric, 8).unwrap().curve;
    let b = run_normal(&s, &gmm, &metric, 8).unwrap().curve;
    assert_eq!(a, b);
}
