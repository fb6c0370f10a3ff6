use std::collections::HashSet;
use std::path::Path;

use curriculum_core::centrality::{build_digraph_from_knn, Edge};
use curriculum_core::curriculum::{run_active_set, run_normal, Sweep};
use curriculum_core::io::read_features;
use curriculum_core::simulation::TrainerKind;
use curriculum_core::{
    build_schedule, default_k, pairwise_knn, percolation_curve, stationary_centrality, vshape_experiment,
    ActiveSetConfig, CentralityRanking, CurriculumSchedule, ExperimentParams, FeatureFormat, FeatureSet,
    FrechetMetric, GaussianTrainer, GmmTrainer, PercolationCurve, PowerIterationOptions, QualityMetric, RankEntry,
    Scalar, ScoreCurve, SyntheticSpec, Trainer, WeightedDigraph,
};
use serde::Serialize;

use crate::args::{CentralityArgs, CurriculumArgs, GlobalArgs, InputFormat, Mode, PercolationArgs, SimulateArgs, TrainerChoice};
use crate::config::{self, parse_seeds, required, CurriculumConfig, SimulateConfig};
use crate::error::{CliError, CliResult, Context};
use crate::output::{emit, to_json, write_atomic};

const DEFAULT_COMPONENTS: usize = 2;

fn input_format(global: &GlobalArgs, path: &Path) -> FeatureFormat {
    match global.format {
        Some(InputFormat::Csv) => FeatureFormat::Csv,
        Some(InputFormat::Bin) => FeatureFormat::Binary,
        None => FeatureFormat::from_path(path),
    }
}

fn load_features<T: Scalar>(global: &GlobalArgs, path: &Path) -> CliResult<FeatureSet<T>> {
    Ok(read_features(path, input_format(global, path))?)
}

#[derive(Serialize)]
struct GraphDump<'a> {
    k: usize,
    sigma: f64,
    target_geomean: f64,
    edges: &'a [Edge<f64>],
}

fn rank<T: Scalar>(features: &FeatureSet<T>, args: &CentralityArgs) -> CliResult<(WeightedDigraph<f64>, CentralityRanking<f64>)> {
    let k = match args.k {
        Some(k) => k,
        None => default_k(features.len())?,
    };
    let knn = pairwise_knn(features, k)?;
    let graph = build_digraph_from_knn::<T, f64>(&knn, args.target_geomean)?;
    drop(knn);
    let opts = PowerIterationOptions {
        tol: args.tol,
        max_iters: args.max_iters,
        ..Default::default()
    };
    let ranking = stationary_centrality(&graph, &opts)?;
    Ok((graph, ranking))
}

pub fn centrality(global: &GlobalArgs, args: &CentralityArgs) -> CliResult<()> {
    // Binary files hold f32 values; the neighbor search runs at that
    // precision and everything downstream in f64.
    let (graph, ranking) = match input_format(global, &args.input) {
        FeatureFormat::Binary => rank(&load_features::<f32>(global, &args.input)?, args)?,
        FeatureFormat::Csv => rank(&load_features::<f64>(global, &args.input)?, args)?,
    };
    eprintln!(
        "centrality: m = {}, k = {}, sigma = {:.6e}, {} iterations, residual {:.3e}",
        graph.len(),
        graph.k(),
        graph.sigma(),
        ranking.iterations(),
        ranking.residual()
    );
    if let Some(path) = &args.dump_graph {
        let edges: Vec<Edge<f64>> = graph.edges().collect();
        let dump = GraphDump {
            k: graph.k(),
            sigma: graph.sigma(),
            target_geomean: args.target_geomean,
            edges: &edges,
        };
        write_atomic(path, &to_json(&dump)?)?;
    }
    emit(global.output.as_deref(), &to_json(&ranking.entries())?)
}

#[derive(Serialize)]
struct CurriculumOutput<'a> {
    schedule: &'a CurriculumSchedule,
    curve: &'a ScoreCurve,
}

fn sweep<Tr>(
    mode: Mode,
    schedule: &CurriculumSchedule,
    active: Option<ActiveSetConfig>,
    trainer: &Tr,
    metric: &FrechetMetric<f64>,
    seed: u64,
) -> curriculum_core::Result<Sweep<Tr::State>>
where
    Tr: Trainer + Sync,
    Tr::State: Send,
    FrechetMetric<f64>: QualityMetric<Tr::State>,
{
    match (mode, active) {
        (Mode::Active, Some(cfg)) => run_active_set(schedule, &cfg, trainer, metric, seed),
        _ => run_normal(schedule, trainer, metric, seed),
    }
}

pub fn curriculum(global: &GlobalArgs, args: &CurriculumArgs) -> CliResult<()> {
    let file: CurriculumConfig = match &args.config {
        Some(path) => config::load(path)?,
        None => CurriculumConfig::default(),
    };
    let base = required(args.base.or(file.base), "base")?;
    let increment = required(args.increment.or(file.increment), "increment")?;
    let mode = args.mode.or(file.mode).unwrap_or(Mode::Normal);
    let active_size = args.active_size.or(file.active_size);
    let trainer_choice = args.trainer.or(file.trainer).unwrap_or(TrainerChoice::Gaussian);
    let components = args.components.or(file.components).unwrap_or(DEFAULT_COMPONENTS);
    let seed = global.seed.or(file.seed).unwrap_or(0);
    if mode == Mode::Active && active_size.is_none() {
        return Err(CliError::input(anyhow::anyhow!("--active-size is required with --mode active")));
    }

    let features = load_features::<f64>(global, &args.features)?;
    let reference = match &args.reference {
        Some(path) => Some(load_features::<f64>(global, path)?),
        None => None,
    };
    let text = std::fs::read_to_string(&args.ranking).input_context(|| format!("cannot read {}", args.ranking.display()))?;
    let entries: Vec<RankEntry> =
        serde_json::from_str(&text).input_context(|| format!("invalid ranking JSON in {}", args.ranking.display()))?;
    let ranking = CentralityRanking::from_entries(&entries)?;
    let ranked: HashSet<u64> = ranking.ids().iter().copied().collect();
    let present: HashSet<u64> = features.ids().iter().copied().collect();
    if ranked != present || ranked.len() != ranking.len() {
        return Err(CliError::input(anyhow::anyhow!(
            "ranking ids do not match the feature ids ({} ranked, {} features, {} in common)",
            ranking.len(),
            features.len(),
            ranked.intersection(&present).count()
        )));
    }

    let schedule = build_schedule(&ranking, base, increment)?;
    let metric = FrechetMetric::from_reference(reference.as_ref().unwrap_or(&features))?;
    let active = active_size.map(|active_size| ActiveSetConfig { active_size, seed });
    let curve = match trainer_choice {
        TrainerChoice::Gaussian => sweep(mode, &schedule, active, &GaussianTrainer::new(&features), &metric, seed)?.curve,
        TrainerChoice::Gmm => sweep(mode, &schedule, active, &GmmTrainer::new(&features, components)?, &metric, seed)?.curve,
    };
    if let Some(i) = curve.optimal_index {
        eprintln!(
            "optimal stage {i}: cumulative size {}, score {:.6}",
            curve.cumulative_sizes[i], curve.scores[i]
        );
    }
    emit(
        global.output.as_deref(),
        &to_json(&CurriculumOutput {
            schedule: &schedule,
            curve: &curve,
        })?,
    )
}

#[derive(Serialize)]
struct PercolationOutput<'a> {
    #[serde(flatten)]
    curve: &'a PercolationCurve<f64>,
    critical_chi: f64,
    m: usize,
    d: usize,
}

pub fn percolation(global: &GlobalArgs, args: &PercolationArgs) -> CliResult<()> {
    let features = load_features::<f64>(global, &args.input)?;
    let curve = percolation_curve(&features, args.grid_size, args.ridge)?;
    eprintln!(
        "percolation: chi_alpha1 = {:.6}, critical chi = {:.6} (index {})",
        curve.chi_alpha1,
        curve.critical_chi(),
        curve.critical_index
    );
    let out = PercolationOutput {
        critical_chi: curve.critical_chi(),
        curve: &curve,
        m: features.len(),
        d: features.dim(),
    };
    emit(global.output.as_deref(), &to_json(&out)?)
}

pub fn simulate(global: &GlobalArgs, args: &SimulateArgs) -> CliResult<()> {
    let file: SimulateConfig = match &args.config {
        Some(path) => config::load(path)?,
        None => SimulateConfig::default(),
    };
    let spec: SyntheticSpec = config::load(&args.spec)?;
    let seeds = match &args.seeds {
        Some(text) => parse_seeds(text)?,
        None => match file.seeds {
            Some(s) => s,
            None => global.seed.map(|s| vec![s]).unwrap_or_default(),
        },
    };
    if seeds.is_empty() {
        return Err(CliError::input(anyhow::anyhow!("no seeds given")));
    }
    let mut params = ExperimentParams::new(
        required(args.base.or(file.base), "base")?,
        required(args.increment.or(file.increment), "increment")?,
        seeds,
    );
    params.k = args.k.or(file.k);
    if let Some(t) = args.target_geomean.or(file.target_geomean) {
        params.target_geomean = t;
    }
    params.active_size = args.active_size.or(file.active_size);
    params.trainer = match args.trainer.or(file.trainer).unwrap_or(TrainerChoice::Gaussian) {
        TrainerChoice::Gaussian => TrainerKind::Gaussian,
        TrainerChoice::Gmm => TrainerKind::Gmm {
            components: args.components.or(file.components).unwrap_or(DEFAULT_COMPONENTS),
        },
    };
    let summary = vshape_experiment(&spec, &params)?;
    eprintln!(
        "simulate: {} seeds, v-shaped {:.2}, monotone {:.2}, mean optimal stage {:.2}",
        summary.seeds.len(),
        summary.fraction_v_shaped,
        summary.fraction_monotone,
        summary.mean_optimal_stage
    );
    emit(global.output.as_deref(), &to_json(&summary)?)
}
