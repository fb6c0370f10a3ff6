use curriculum_core::curriculum::Trainer;
use curriculum_core::simulation::{
    fit_gaussian, frechet_distance, generate_reference, generate_synthetic, score_against_reference, vshape_experiment,
    Bound, ClusterSpec, ExperimentParams, GaussianModelState, GaussianTrainer, NoiseSpec, SyntheticSpec,
};
use curriculum_core::FeatureSet;
use ndarray::{array, Array1, Array2};
use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

fn state(mean: Array1<f64>, covariance: Array2<f64>) -> GaussianModelState<f64> {
    GaussianModelState {
        mean,
        covariance,
        fitted_count: 0,
    }
}

fn spd_strategy(d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-2.0f64..2.0, d * d).prop_map(move |v| {
        let a = Array2::from_shape_vec((d, d), v).unwrap();
        a.dot(&a.t()) + Array2::<f64>::eye(d) * 0.1
    })
}

fn gaussian_strategy(d: usize) -> impl Strategy<Value = GaussianModelState<f64>> {
    (prop::collection::vec(-5.0f64..5.0, d), spd_strategy(d)).prop_map(|(m, c)| state(Array1::from(m), c))
}

/// Squared 2-Wasserstein distance between 1-D Gaussians as the integral of
/// squared quantile differences (the monotone coupling), midpoint rule.
fn w2_squared_1d(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let a = Normal::new(m1, s1).unwrap();
    let b = Normal::new(m2, s2).unwrap();
    let n = 200_000;
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let diff = a.inverse_cdf(u) - b.inverse_cdf(u);
            diff * diff
        })
        .sum::<f64>()
        / n as f64
}

/// Equal-weight polar quantization of N(0, I₂): radial quantiles of the chi
/// distribution times uniformly spaced angles.
fn quantized_standard_normal_2d(radii: usize, angles: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let u = (i as f64 + 0.5) / radii as f64;
        let r = (-2.0 * (1.0 - u).ln()).sqrt();
        for j in 0..angles {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64) / angles as f64;
            pts.push([r * t.cos(), r * t.sin()]);
        }
    }
    pts
}

/// Squared 2-Wasserstein distance between quantized 2-D Gaussians by exact
/// discrete optimal transport (equal weights reduce it to an assignment).
fn w2_squared_2d(a: &GaussianModelState<f64>, b: &GaussianModelState<f64>) -> f64 {
    let z = quantized_standard_normal_2d(24, 30);
    let map = |g: &GaussianModelState<f64>| -> Vec<[f64; 2]> {
        let c = &g.covariance;
        let l00 = c[[0, 0]].sqrt();
        let l10 = c[[1, 0]] / l00;
        let l11 = (c[[1, 1]] - l10 * l10).sqrt();
        z.iter()
            .map(|p| [g.mean[0] + l00 * p[0], g.mean[1] + l10 * p[0] + l11 * p[1]])
            .collect()
    };
    let (pa, pb) = (map(a), map(b));
    let n = pa.len();
    let scale = 1e9;
    let costs = Matrix::from_fn(n, n, |(i, j)| {
        let dx = pa[i][0] - pb[j][0];
        let dy = pa[i][1] - pb[j][1];
        ((dx * dx + dy * dy) * scale).round() as i64
    });
    let (total, _) = kuhn_munkres_min(&costs);
    total as f64 / scale / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frechet_is_symmetric_and_nonnegative(a in gaussian_strategy(4), b in gaussian_strategy(4)) {
        let ab = frechet_distance(&a, &b).unwrap();
        let ba = frechet_distance(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(frechet_distance(&a, &a).unwrap().abs() < 1e-9);
    }

    #[test]
    fn frechet_matches_quantile_w2_in_one_dimension(
        m1 in -3.0f64..3.0, m2 in -3.0f64..3.0, s1 in 0.2f64..3.0, s2 in 0.2f64..3.0,
    ) {
        let f = frechet_distance(&state(array![m1], array![[s1 * s1]]), &state(array![m2], array![[s2 * s2]])).unwrap();
        let oracle = w2_squared_1d(m1, s1, m2, s2);
        prop_assert!((f - oracle).abs() <= 0.01 * oracle.max(1e-3), "{f} vs {oracle}");
    }
}

#[test]
fn frechet_matches_discrete_transport_in_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..6 {
        let mut random_state = || {
            let a = Array2::from_shape_simple_fn((2, 2), || rng.random_range(-1.5..1.5));
            let cov = a.dot(&a.t()) + Array2::<f64>::eye(2) * 0.3;
            let mean = Array1::from_shape_simple_fn(2, || rng.random_range(-2.0..2.0));
            state(mean, cov)
        };
        let (a, b) = (random_state(), random_state());
        let f = frechet_distance(&a, &b).unwrap();
        let oracle = w2_squared_2d(&a, &b);
        assert!((f - oracle).abs() <= 0.01 * f, "{f} vs {oracle}");
    }
}

fn sample_gaussian(mean: &Array1<f64>, chol: &Array2<f64>, n: usize, seed: u64) -> FeatureSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = mean.len();
    let z = Array2::from_shape_simple_fn((n, d), || rng.sample(StandardNormal));
    FeatureSet::with_sequential_ids(z.dot(&chol.t()) + mean).unwrap()
}

#[test]
fn fitted_mean_within_three_standard_errors() {
    let mean = array![1.0, -2.0, 0.5];
    let chol = array![[1.0, 0.0, 0.0], [0.5, 2.0, 0.0], [-0.3, 0.2, 0.7]];
    let cov = chol.dot(&chol.t());
    let fs = sample_gaussian(&mean, &chol, 1000, 3);
    let ids: Vec<u64> = fs.ids().to_vec();
    let s = GaussianTrainer::new(&fs).train(&ids, None, 0).unwrap();
    for i in 0..3 {
        let se = (cov[[i, i]] / 1000.0).sqrt();
        assert!((s.mean[i] - mean[i]).abs() < 3.0 * se, "coordinate {i}");
    }
}

#[test]
fn fit_error_shrinks_like_inverse_root_n() {
    let mean = array![0.0, 3.0];
    let chol = array![[1.5, 0.0], [0.4, 0.8]];
    let cov = chol.dot(&chol.t());
    let err = |n: usize| -> f64 {
        (0..10)
            .map(|seed| {
                let fs = sample_gaussian(&mean, &chol, n, 100 + seed);
                let s = fit_gaussian(fs.points().view(), 1e-6).unwrap();
                frechet_distance(&s, &state(mean.clone(), cov.clone())).unwrap().sqrt()
            })
            .sum::<f64>()
            / 10.0
    };
    let (small, large) = (err(1_000), err(100_000));
    let ratio = small / large;
    // sqrt(100) = 10; allow for sampling spread.
    assert!(ratio > 5.0 && ratio < 20.0, "{small} {large} {ratio}");
}

fn spec(noise: usize) -> SyntheticSpec {
    SyntheticSpec {
        clusters: vec![
            ClusterSpec { mean: vec![-2.0, 0.0, 1.0, 0.0], covariance: None, scale: Some(1.0), count: 300 },
            ClusterSpec { mean: vec![2.0, 0.0, -1.0, 0.0], covariance: None, scale: Some(0.8), count: 300 },
        ],
        noise: (noise > 0).then(|| NoiseSpec { count: noise, low: Bound::Uniform(-10.0), high: Bound::Uniform(10.0) }),
        seed: 7,
        reference_count: 4000,
    }
}

#[test]
fn noise_raises_the_score() {
    let reference: FeatureSet<f64> = generate_reference(&spec(0)).unwrap();
    let clean = generate_synthetic::<f64>(&spec(0)).unwrap().features;
    let noisy = generate_synthetic::<f64>(&spec(300)).unwrap().features;
    let fit = |fs: &FeatureSet<f64>| fit_gaussian(fs.points().view(), 1e-6).unwrap();
    let clean_score = score_against_reference(&fit(&clean), &reference).unwrap();
    let noisy_score = score_against_reference(&fit(&noisy), &reference).unwrap();
    assert!(noisy_score > clean_score, "{noisy_score} <= {clean_score}");
    assert!(score_against_reference(&fit(&reference), &reference).unwrap().abs() < 1e-10);
}

#[test]
fn generated_noise_stays_in_box_and_is_reproducible() {
    let a = generate_synthetic::<f64>(&spec(50)).unwrap();
    let b = generate_synthetic::<f64>(&spec(50)).unwrap();
    assert_eq!(a.features.points(), b.features.points());
    assert_eq!(a.labels, b.labels);
    for (row, label) in a.labels.iter().enumerate() {
        if *label == curriculum_core::simulation::Label::Noise {
            assert!(a.features.row(row).iter().all(|v| (-10.0..=10.0).contains(v)));
        }
    }
}

#[test]
fn experiment_is_bitwise_reproducible() {
    let mut params = ExperimentParams::new(150, 100, vec![1, 2, 3]);
    params.active_size = Some(200);
    let a = vshape_experiment(&spec(250), &params).unwrap();
    let b = vshape_experiment(&spec(250), &params).unwrap();
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
}
